#pragma once

#include <Eigen/Dense>
#include <vector>

#include "isac/common.hpp"
#include "isac/otfs.hpp"

namespace isac {

// ---------------------------------------------------------------------------
// On-grid delay-Doppler channel model for an uplink SIMO link (single-antenna
// user transmitting... seen from the BS array the roles are symmetric, so the
// code talks about "antennas" generically and the steering phase is the BS
// side's).
//
// A physical path (gain, delay, Doppler, direction cosine) quantizes to a
// delay tap m = round(delay * sample_rate) and a Doppler tap
// n = round(doppler * frame_duration), n in [-N/2, N/2-1]. The channel as
// seen by antenna a at sample q through delay tap m is
//   h[m, q, a] = sum_i gain_i * z^(n_i * (q - m)) * e^(-j*2*pi*spacing*a*cos_i)
// restricted to paths with delay tap m, where z = exp(j*2*pi / (N*(M+cp)))
// advances one Doppler tap by one full turn over the frame.
// ---------------------------------------------------------------------------

struct PathParams {
  cplx gain;            // complex amplitude
  double delay_s = 0;   // first-arrival-referenced (excess) delay, >= 0
  double doppler_hz = 0;
  double aod_cos = 0;   // direction cosine at the array, in [-1, 1]
};

struct TapIndex {
  int delay_tap = 0;    // m, in [0, max_delay_taps)
  int doppler_tap = 0;  // n, in [-N/2, N/2-1]
};

// Per-sample Doppler phasor base z.
inline cplx doppler_base(const CommConfig& cfg) {
  return std::polar(1.0, 2.0 * kPi /
                             (cfg.doppler_bins * cfg.symbol_samples()));
}

// Round a physical path onto the tap grid. max_delay_taps is the delay
// extent the receiver's recovery grid covers (the layout's guard_rows);
// paths quantizing outside it, or outside the Doppler grid, throw ConfigError.
TapIndex quantize_path(const PathParams& path, const CommConfig& cfg,
                       int max_delay_taps);

// Dense DD channel tensor over (delay tap, Doppler storage column, antenna).
struct DdChannel {
  int delay_taps = 0;    // grid delay extent (layout guard_rows)
  int doppler_bins = 0;  // N
  int antennas = 0;      // A

  // Canonical cell order: antenna fastest, then Doppler column, then delay.
  // This same index identifies dictionary columns and support entries
  // everywhere downstream.
  static int cell_index(int m, int k, int a, int doppler_bins, int antennas) {
    return (m * doppler_bins + k) * antennas + a;
  }
  int index(int m, int k, int a) const {
    return cell_index(m, k, a, doppler_bins, antennas);
  }
  cplx& at(int m, int k, int a) { return h[index(m, k, a)]; }
  cplx at(int m, int k, int a) const { return h[index(m, k, a)]; }
  int size() const { return delay_taps * doppler_bins * antennas; }

  std::vector<cplx> h;  // dense, size() entries
};

DdChannel make_dd_channel(int delay_taps, const CommConfig& cfg);

// Accumulate quantized paths into a channel tensor. Paths sharing a tap cell
// add coherently.
DdChannel dd_channel_tensor(const std::vector<PathParams>& paths,
                            const CommConfig& cfg, int max_delay_taps);

// Push per-antenna transmit frames through the delay-time channel the tensor
// induces and sum at the single receive chain:
//   r[q] = sum_a sum_m h[m, q, a] * s_a[q - m]      (s = 0 before the frame)
// With rng given, adds white CN(0, noise_var) per sample.
Eigen::VectorXcd apply_channel(const std::vector<Eigen::VectorXcd>& tx,
                               const DdChannel& chan, const CommConfig& cfg);
Eigen::VectorXcd apply_channel(const std::vector<Eigen::VectorXcd>& tx,
                               const DdChannel& chan, const CommConfig& cfg,
                               double noise_var, std::mt19937_64& rng);

// Convenience: quantize + build tensor + apply.
Eigen::VectorXcd apply_channel(const std::vector<Eigen::VectorXcd>& tx,
                               const std::vector<PathParams>& paths,
                               const CommConfig& cfg, int max_delay_taps,
                               double noise_var, std::mt19937_64& rng);

// Channel tensor <-> vector forms used by the sparse recovery stage.
// vectorize_channel lays cells out by cell_index; to_angle_domain applies the
// unitary array DFT to each antenna block (so a single propagation direction
// concentrates in one beam bin), from_angle_domain inverts it.
Eigen::VectorXcd vectorize_channel(const DdChannel& chan);
Eigen::VectorXcd to_angle_domain(const Eigen::VectorXcd& h, int antennas);
Eigen::VectorXcd from_angle_domain(const Eigen::VectorXcd& h_tilde, int antennas);

}  // namespace isac
