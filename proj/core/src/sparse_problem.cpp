#include "isac/sparse_problem.hpp"

#include <cmath>
#include <thread>

#include "isac/dft.hpp"

namespace isac {

namespace {

int dictionary_columns(const FrameLayout& layout, const CommConfig& cfg) {
  return layout.guard_rows * cfg.doppler_bins * cfg.antennas;
}

void check_frame(const std::vector<DdGrid>& frame, const CommConfig& cfg) {
  if (static_cast<int>(frame.size()) != cfg.antennas)
    throw ConfigError("dictionary: need one transmit grid per antenna");
  for (const DdGrid& g : frame)
    if (g.rows() != cfg.delay_bins || g.cols() != cfg.doppler_bins)
      throw ConfigError("dictionary: grid shape does not match config");
}

}  // namespace

Eigen::MatrixXcd closed_form_phase_matrix(const FrameLayout& layout,
                                          const CommConfig& cfg) {
  cfg.validate();
  layout.validate(cfg);
  const int m_bins = cfg.delay_bins;
  const int n_bins = cfg.doppler_bins;
  const int half = n_bins / 2;
  const int ants = cfg.antennas;
  const double base_arg = 2.0 * kPi / (n_bins * cfg.symbol_samples());

  Eigen::MatrixXcd z(layout.observations(cfg), dictionary_columns(layout, cfg));
  for (int m = 0; m < layout.pilot_rows; ++m) {
    for (int k = 0; k < n_bins; ++k) {
      const int row = grid_index(m, k, n_bins);
      const int n_obs = k - half;
      for (int mp = 0; mp < layout.guard_rows; ++mp) {
        const int shift = ((m - mp) % m_bins + m_bins) % m_bins;
        const cplx v = std::polar(1.0, base_arg * n_obs * shift);
        for (int kp = 0; kp < n_bins; ++kp) {
          const int col0 = (mp * n_bins + kp) * ants;
          for (int a = 0; a < ants; ++a) z(row, col0 + a) = v;
        }
      }
    }
  }
  return z;
}

Eigen::MatrixXcd closed_form_pilot_matrix(const std::vector<DdGrid>& frame,
                                          const FrameLayout& layout,
                                          const CommConfig& cfg) {
  cfg.validate();
  layout.validate(cfg);
  check_frame(frame, cfg);
  const int m_bins = cfg.delay_bins;
  const int n_bins = cfg.doppler_bins;
  const int ants = cfg.antennas;

  Eigen::MatrixXcd p(layout.observations(cfg), dictionary_columns(layout, cfg));
  for (int m = 0; m < layout.pilot_rows; ++m) {
    for (int k = 0; k < n_bins; ++k) {
      const int row = grid_index(m, k, n_bins);
      for (int mp = 0; mp < layout.guard_rows; ++mp) {
        const int m_src = ((m - mp) % m_bins + m_bins) % m_bins;
        for (int kp = 0; kp < n_bins; ++kp) {
          const int k_src = ((k - kp) % n_bins + n_bins) % n_bins;
          const int col0 = (mp * n_bins + kp) * ants;
          for (int a = 0; a < ants; ++a)
            p(row, col0 + a) = frame[static_cast<std::size_t>(a)](m_src, k_src);
        }
      }
    }
  }
  return p;
}

Eigen::MatrixXcd closed_form_dictionary(const std::vector<DdGrid>& frame,
                                        const FrameLayout& layout,
                                        const CommConfig& cfg) {
  return closed_form_phase_matrix(layout, cfg)
      .cwiseProduct(closed_form_pilot_matrix(frame, layout, cfg));
}

Eigen::MatrixXcd probe_dictionary(const std::vector<DdGrid>& frame,
                                  const FrameLayout& layout,
                                  const CommConfig& cfg, int threads) {
  cfg.validate();
  layout.validate(cfg);
  check_frame(frame, cfg);
  if (threads < 1) threads = 1;

  const std::vector<Eigen::VectorXcd> tx = modulate(frame, cfg);
  const int cols = dictionary_columns(layout, cfg);
  Eigen::MatrixXcd psi(layout.observations(cfg), cols);

  // Warm the kernel cache before fanning out.
  cached_unitary_dft(cfg.delay_bins);
  cached_unitary_dft(cfg.doppler_bins);

  const int ants = cfg.antennas;
  const int n_bins = cfg.doppler_bins;
  auto probe_range = [&](int begin, int end) {
    DdChannel chan = make_dd_channel(layout.guard_rows, cfg);
    for (int t = begin; t < end; ++t) {
      const int a = t % ants;
      const int k = (t / ants) % n_bins;
      const int m = t / (ants * n_bins);
      chan.at(m, k, a) = cplx(1, 0);
      const Eigen::VectorXcd r = apply_channel(tx, chan, cfg);
      psi.col(t) = extract_observations(demodulate(r, cfg), layout);
      chan.at(m, k, a) = cplx(0, 0);
    }
  };

  if (threads == 1 || cols < 2 * threads) {
    probe_range(0, cols);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    const int chunk = (cols + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
      const int begin = w * chunk;
      const int end = std::min(cols, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(probe_range, begin, end);
    }
    for (std::thread& th : pool) th.join();
  }
  return psi;
}

Eigen::MatrixXcd dictionary_to_angle(const Eigen::MatrixXcd& psi,
                                     int antennas) {
  if (antennas < 1 || psi.cols() % antennas != 0)
    throw ConfigError("dictionary_to_angle: columns not a multiple of antennas");
  const Eigen::MatrixXcd& f_a = cached_unitary_dft(antennas);
  // h = F_A^H h_tilde blockwise, so the angle dictionary is psi * (I (x) F_A^H).
  Eigen::MatrixXcd out(psi.rows(), psi.cols());
  for (Eigen::Index b = 0; b < psi.cols(); b += antennas)
    out.middleCols(b, antennas) = psi.middleCols(b, antennas) * f_a.adjoint();
  return out;
}

DictionaryAudit audit_dictionary(const Eigen::MatrixXcd& closed,
                                 const Eigen::MatrixXcd& oracle) {
  if (closed.rows() != oracle.rows() || closed.cols() != oracle.cols())
    throw ConfigError("audit_dictionary: shape mismatch");
  DictionaryAudit audit;
  audit.max_abs_dev = (closed - oracle).cwiseAbs().maxCoeff();
  const double denom = oracle.norm();
  audit.rel_frobenius = denom > 0 ? (closed - oracle).norm() / denom : 0.0;
  return audit;
}

}  // namespace isac
