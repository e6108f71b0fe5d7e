#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string>

namespace isac {

using cplx = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Thrown when a config struct or a function argument violates a documented
// precondition (bad shape, out-of-range parameter, inconsistent layout).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// ---------------------------------------------------------------------------
// Deterministic seeding.
//
// Every random draw in the library is keyed, not sequential: a consumer that
// needs randomness derives its own generator from (master seed, stream ids).
// This keeps results independent of evaluation order and thread count.
// splitmix64 is the usual finalizer-quality mixer for this job.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Fold an ordered list of stream ids into one 64-bit seed.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> stream) {
  std::uint64_t s = splitmix64(master);
  for (std::uint64_t part : stream) s = splitmix64(s ^ part);
  return s;
}

inline std::mt19937_64 make_rng(std::uint64_t master,
                                std::initializer_list<std::uint64_t> stream) {
  return std::mt19937_64(derive_seed(master, stream));
}

// Circularly symmetric complex Gaussian with E[|x|^2] = variance.
inline cplx complex_gaussian(std::mt19937_64& rng, double variance) {
  std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
  return {n(rng), n(rng)};
}

// Unit-energy QPSK symbol, Gray-agnostic (just the four corners).
inline cplx qpsk_symbol(std::mt19937_64& rng) {
  static constexpr double kInvSqrt2 = 0.7071067811865475244;
  const std::uint64_t bits = rng() & 3u;
  const double re = (bits & 1u) ? -kInvSqrt2 : kInvSqrt2;
  const double im = (bits & 2u) ? -kInvSqrt2 : kInvSqrt2;
  return {re, im};
}

}  // namespace isac
