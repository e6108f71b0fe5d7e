#include "isac/dft.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace isac {

Eigen::MatrixXcd unitary_dft(int n) {
  if (n <= 0) throw ConfigError("unitary_dft: size must be positive");
  Eigen::MatrixXcd f(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      const double phase = -2.0 * kPi * static_cast<double>(k) * j / n;
      f(k, j) = std::polar(scale, phase);
    }
  }
  return f;
}

const Eigen::MatrixXcd& cached_unitary_dft(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<Eigen::MatrixXcd>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Eigen::MatrixXcd>(unitary_dft(n));
  return *slot;
}

Eigen::MatrixXcd raw_dft(int n) {
  if (n <= 0) throw ConfigError("raw_dft: size must be positive");
  Eigen::MatrixXcd f(n, n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      f(k, j) = std::polar(1.0, -2.0 * kPi * static_cast<double>(k) * j / n);
  return f;
}

Eigen::MatrixXcd raw_conj_dft(int n_out, int n_in) {
  if (n_out <= 0 || n_in <= 0 || n_in > n_out)
    throw ConfigError("raw_conj_dft: need 0 < n_in <= n_out");
  Eigen::MatrixXcd f(n_out, n_in);
  for (int k = 0; k < n_out; ++k)
    for (int j = 0; j < n_in; ++j)
      f(k, j) = std::polar(1.0, 2.0 * kPi * static_cast<double>(k) * j / n_out);
  return f;
}

}  // namespace isac
