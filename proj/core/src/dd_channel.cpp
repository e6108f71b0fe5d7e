#include "isac/dd_channel.hpp"

#include <cmath>
#include <string>

#include "isac/dft.hpp"

namespace isac {

TapIndex quantize_path(const PathParams& path, const CommConfig& cfg,
                       int max_delay_taps) {
  if (path.delay_s < 0)
    throw ConfigError("quantize_path: negative delay (paths must be "
                      "referenced to the first arrival)");
  if (std::abs(path.aod_cos) > 1.0)
    throw ConfigError("quantize_path: |direction cosine| > 1");

  TapIndex tap;
  tap.delay_tap =
      static_cast<int>(std::llround(path.delay_s * cfg.sample_rate_hz()));
  tap.doppler_tap =
      static_cast<int>(std::llround(path.doppler_hz * cfg.frame_duration_s()));

  const int half = cfg.doppler_bins / 2;
  if (tap.delay_tap >= max_delay_taps)
    throw ConfigError("quantize_path: delay tap " +
                      std::to_string(tap.delay_tap) +
                      " outside recovery grid of " +
                      std::to_string(max_delay_taps) + " taps");
  if (tap.doppler_tap < -half || tap.doppler_tap > half - 1)
    throw ConfigError("quantize_path: Doppler tap " +
                      std::to_string(tap.doppler_tap) +
                      " outside [-N/2, N/2-1]");
  return tap;
}

DdChannel make_dd_channel(int delay_taps, const CommConfig& cfg) {
  cfg.validate();
  if (delay_taps < 1 || delay_taps > cfg.delay_bins)
    throw ConfigError("make_dd_channel: bad delay extent");
  DdChannel chan;
  chan.delay_taps = delay_taps;
  chan.doppler_bins = cfg.doppler_bins;
  chan.antennas = cfg.antennas;
  chan.h.assign(static_cast<std::size_t>(chan.size()), cplx(0, 0));
  return chan;
}

DdChannel dd_channel_tensor(const std::vector<PathParams>& paths,
                            const CommConfig& cfg, int max_delay_taps) {
  DdChannel chan = make_dd_channel(max_delay_taps, cfg);
  const int half = cfg.doppler_bins / 2;
  for (const PathParams& path : paths) {
    const TapIndex tap = quantize_path(path, cfg, max_delay_taps);
    const int k = tap.doppler_tap + half;  // storage column
    for (int a = 0; a < cfg.antennas; ++a) {
      const cplx steer =
          std::polar(1.0, -2.0 * kPi * cfg.spacing * a * path.aod_cos);
      chan.at(tap.delay_tap, k, a) += path.gain * steer;
    }
  }
  return chan;
}

namespace {

void apply_channel_into(const std::vector<Eigen::VectorXcd>& tx,
                        const DdChannel& chan, const CommConfig& cfg,
                        Eigen::VectorXcd& r) {
  if (static_cast<int>(tx.size()) != chan.antennas)
    throw ConfigError("apply_channel: need one transmit frame per antenna");
  const int q_len = cfg.frame_samples();
  for (const Eigen::VectorXcd& s : tx)
    if (s.size() != q_len)
      throw ConfigError("apply_channel: frame length does not match config");
  if (chan.doppler_bins != cfg.doppler_bins || chan.antennas != cfg.antennas)
    throw ConfigError("apply_channel: tensor shape does not match config");
  if (chan.delay_taps > cfg.cp_len + 1)
    throw ConfigError("apply_channel: delay extent exceeds the CP");

  r.setZero(q_len);
  const int half = chan.doppler_bins / 2;
  // Iterate occupied cells only; each contributes a Doppler-rotated, delayed
  // copy of one antenna's frame.
  for (int m = 0; m < chan.delay_taps; ++m) {
    for (int k = 0; k < chan.doppler_bins; ++k) {
      const int n = k - half;
      cplx base(1.0, 0.0);
      bool base_ready = false;
      for (int a = 0; a < chan.antennas; ++a) {
        const cplx g = chan.at(m, k, a);
        if (g == cplx(0, 0)) continue;
        if (!base_ready) {
          base = std::polar(
              1.0, 2.0 * kPi * n / (cfg.doppler_bins * cfg.symbol_samples()));
          base_ready = true;
        }
        const Eigen::VectorXcd& s = tx[a];
        cplx rot(1.0, 0.0);  // z^(n*(q-m)) as a running phasor
        for (int q = m; q < q_len; ++q) {
          r(q) += g * rot * s(q - m);
          rot *= base;
        }
      }
    }
  }
}

}  // namespace

Eigen::VectorXcd apply_channel(const std::vector<Eigen::VectorXcd>& tx,
                               const DdChannel& chan, const CommConfig& cfg) {
  Eigen::VectorXcd r;
  apply_channel_into(tx, chan, cfg, r);
  return r;
}

Eigen::VectorXcd apply_channel(const std::vector<Eigen::VectorXcd>& tx,
                               const DdChannel& chan, const CommConfig& cfg,
                               double noise_var, std::mt19937_64& rng) {
  if (noise_var < 0) throw ConfigError("apply_channel: negative noise variance");
  Eigen::VectorXcd r;
  apply_channel_into(tx, chan, cfg, r);
  if (noise_var > 0)
    for (Eigen::Index q = 0; q < r.size(); ++q)
      r(q) += complex_gaussian(rng, noise_var);
  return r;
}

Eigen::VectorXcd apply_channel(const std::vector<Eigen::VectorXcd>& tx,
                               const std::vector<PathParams>& paths,
                               const CommConfig& cfg, int max_delay_taps,
                               double noise_var, std::mt19937_64& rng) {
  const DdChannel chan = dd_channel_tensor(paths, cfg, max_delay_taps);
  return apply_channel(tx, chan, cfg, noise_var, rng);
}

Eigen::VectorXcd vectorize_channel(const DdChannel& chan) {
  Eigen::VectorXcd h(chan.size());
  for (int i = 0; i < chan.size(); ++i) h(i) = chan.h[static_cast<std::size_t>(i)];
  return h;
}

Eigen::VectorXcd to_angle_domain(const Eigen::VectorXcd& h, int antennas) {
  if (antennas < 1 || h.size() % antennas != 0)
    throw ConfigError("to_angle_domain: length not a multiple of antennas");
  const Eigen::MatrixXcd& f_a = cached_unitary_dft(antennas);
  Eigen::VectorXcd out(h.size());
  for (Eigen::Index b = 0; b < h.size(); b += antennas)
    out.segment(b, antennas) = f_a * h.segment(b, antennas);
  return out;
}

Eigen::VectorXcd from_angle_domain(const Eigen::VectorXcd& h_tilde,
                                   int antennas) {
  if (antennas < 1 || h_tilde.size() % antennas != 0)
    throw ConfigError("from_angle_domain: length not a multiple of antennas");
  const Eigen::MatrixXcd& f_a = cached_unitary_dft(antennas);
  Eigen::VectorXcd out(h_tilde.size());
  for (Eigen::Index b = 0; b < h_tilde.size(); b += antennas)
    out.segment(b, antennas) = f_a.adjoint() * h_tilde.segment(b, antennas);
  return out;
}

}  // namespace isac
