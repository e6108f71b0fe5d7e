#include "isac/otfs.hpp"

#include <cmath>
#include <ostream>

#include "isac/dft.hpp"

namespace isac {

void CommConfig::validate() const {
  if (delay_bins < 2) throw ConfigError("CommConfig: delay_bins must be >= 2");
  if (doppler_bins < 2 || doppler_bins % 2 != 0)
    throw ConfigError("CommConfig: doppler_bins must be even and >= 2");
  if (cp_len < 0 || cp_len >= delay_bins)
    throw ConfigError("CommConfig: cp_len must be in [0, delay_bins)");
  if (subcarrier_hz <= 0 || carrier_hz <= 0)
    throw ConfigError("CommConfig: frequencies must be positive");
  if (antennas < 1) throw ConfigError("CommConfig: antennas must be >= 1");
  if (spacing <= 0) throw ConfigError("CommConfig: spacing must be positive");
}

double FrameLayout::overhead() const {
  // Callers that need eta should divide by their config's delay_bins; kept
  // here so the ratio definition lives in one place.
  return static_cast<double>(pilot_rows);
}

void FrameLayout::validate(const CommConfig& cfg) const {
  if (pilot_rows < 1) throw ConfigError("FrameLayout: pilot_rows must be >= 1");
  if (guard_rows < 1) throw ConfigError("FrameLayout: guard_rows must be >= 1");
  if (pilot_rows + 2 * guard_rows > cfg.delay_bins)
    throw ConfigError("FrameLayout: pilot+guard rows exceed delay_bins");
  if (guard_rows > cfg.cp_len)
    throw ConfigError(
        "FrameLayout: guard_rows exceeds cp_len; delay taps past the CP break "
        "the per-symbol circular model");
}

FrameLayout FrameLayout::from_overhead(double eta, const CommConfig& cfg,
                                       int guard_rows) {
  if (eta <= 0.0 || eta >= 1.0)
    throw ConfigError("FrameLayout: overhead must be in (0, 1)");
  FrameLayout layout;
  layout.pilot_rows = static_cast<int>(std::llround(eta * cfg.delay_bins));
  layout.guard_rows = guard_rows;
  layout.validate(cfg);
  return layout;
}

Eigen::VectorXcd modulate(const DdGrid& x_dd, const CommConfig& cfg) {
  cfg.validate();
  const int m_bins = cfg.delay_bins;
  const int n_bins = cfg.doppler_bins;
  if (x_dd.rows() != m_bins || x_dd.cols() != n_bins)
    throw ConfigError("modulate: grid shape does not match config");

  const Eigen::MatrixXcd& f_m = cached_unitary_dft(m_bins);
  const Eigen::MatrixXcd& f_n = cached_unitary_dft(n_bins);

  const Eigen::MatrixXcd x_ft = f_m * x_dd * f_n.adjoint();
  const Eigen::MatrixXcd x_dt = f_m.adjoint() * x_ft;

  // Serialize column by column, prepending the cyclic prefix (the last
  // cp_len samples of the column) to each symbol.
  Eigen::VectorXcd s(cfg.frame_samples());
  const int sym = cfg.symbol_samples();
  for (int k = 0; k < n_bins; ++k) {
    s.segment(k * sym, cfg.cp_len) = x_dt.col(k).tail(cfg.cp_len);
    s.segment(k * sym + cfg.cp_len, m_bins) = x_dt.col(k);
  }
  return s;
}

std::vector<Eigen::VectorXcd> modulate(const std::vector<DdGrid>& x_dd,
                                       const CommConfig& cfg) {
  if (static_cast<int>(x_dd.size()) != cfg.antennas)
    throw ConfigError("modulate: need one grid per antenna");
  std::vector<Eigen::VectorXcd> s;
  s.reserve(x_dd.size());
  for (const DdGrid& grid : x_dd) s.push_back(modulate(grid, cfg));
  return s;
}

DdGrid demodulate(const Eigen::VectorXcd& r, const CommConfig& cfg) {
  cfg.validate();
  if (r.size() != cfg.frame_samples())
    throw ConfigError("demodulate: frame length does not match config");

  const int m_bins = cfg.delay_bins;
  const int n_bins = cfg.doppler_bins;
  const int sym = cfg.symbol_samples();

  Eigen::MatrixXcd y_dt(m_bins, n_bins);
  for (int k = 0; k < n_bins; ++k)
    y_dt.col(k) = r.segment(k * sym + cfg.cp_len, m_bins);  // CP discarded

  const Eigen::MatrixXcd& f_m = cached_unitary_dft(m_bins);
  const Eigen::MatrixXcd& f_n = cached_unitary_dft(n_bins);

  const Eigen::MatrixXcd y_ft = f_m * y_dt;
  return f_m.adjoint() * y_ft * f_n;
}

DdGrid dd_to_freq_time(const DdGrid& x_dd) {
  const Eigen::MatrixXcd& f_m = cached_unitary_dft(static_cast<int>(x_dd.rows()));
  const Eigen::MatrixXcd& f_n = cached_unitary_dft(static_cast<int>(x_dd.cols()));
  return f_m * x_dd * f_n.adjoint();
}

DdGrid dd_to_delay_time(const DdGrid& x_dd) {
  const Eigen::MatrixXcd& f_n = cached_unitary_dft(static_cast<int>(x_dd.cols()));
  return x_dd * f_n.adjoint();
}

std::vector<DdGrid> make_pilot_block(const FrameLayout& layout,
                                     const CommConfig& cfg,
                                     std::mt19937_64& rng) {
  layout.validate(cfg);
  std::vector<DdGrid> pilots(cfg.antennas);
  for (DdGrid& block : pilots) {
    block.resize(layout.pilot_rows, cfg.doppler_bins);
    for (int m = 0; m < layout.pilot_rows; ++m)
      for (int k = 0; k < cfg.doppler_bins; ++k) block(m, k) = qpsk_symbol(rng);
  }
  return pilots;
}

std::vector<DdGrid> build_frame(const std::vector<DdGrid>& pilots,
                                const std::vector<DdGrid>& data,
                                const FrameLayout& layout,
                                const CommConfig& cfg) {
  layout.validate(cfg);
  if (static_cast<int>(pilots.size()) != cfg.antennas ||
      static_cast<int>(data.size()) != cfg.antennas)
    throw ConfigError("build_frame: need one pilot and one data block per antenna");

  const int d_rows = layout.data_rows(cfg);
  std::vector<DdGrid> frame(cfg.antennas);
  for (int a = 0; a < cfg.antennas; ++a) {
    if (pilots[a].rows() != layout.pilot_rows || pilots[a].cols() != cfg.doppler_bins)
      throw ConfigError("build_frame: pilot block shape mismatch");
    if (data[a].rows() != d_rows || data[a].cols() != cfg.doppler_bins)
      throw ConfigError("build_frame: data block shape mismatch");
    DdGrid& grid = frame[a];
    grid = DdGrid::Zero(cfg.delay_bins, cfg.doppler_bins);
    grid.topRows(layout.pilot_rows) = pilots[a];
    if (d_rows > 0)
      grid.middleRows(layout.pilot_rows + layout.guard_rows, d_rows) = data[a];
  }
  return frame;
}

std::vector<DdGrid> random_frame(const FrameLayout& layout,
                                 const CommConfig& cfg,
                                 std::mt19937_64& rng) {
  std::vector<DdGrid> pilots = make_pilot_block(layout, cfg, rng);
  const int d_rows = layout.data_rows(cfg);
  std::vector<DdGrid> data(cfg.antennas);
  for (DdGrid& block : data) {
    block.resize(d_rows, cfg.doppler_bins);
    for (int m = 0; m < d_rows; ++m)
      for (int k = 0; k < cfg.doppler_bins; ++k) block(m, k) = qpsk_symbol(rng);
  }
  return build_frame(pilots, data, layout, cfg);
}

Eigen::VectorXcd extract_observations(const DdGrid& y_dd,
                                      const FrameLayout& layout) {
  if (y_dd.rows() < layout.pilot_rows)
    throw ConfigError("extract_observations: grid has fewer rows than pilot_rows");
  const int n_bins = static_cast<int>(y_dd.cols());
  Eigen::VectorXcd y(layout.pilot_rows * n_bins);
  for (int m = 0; m < layout.pilot_rows; ++m)
    for (int k = 0; k < n_bins; ++k) y(grid_index(m, k, n_bins)) = y_dd(m, k);
  return y;
}

void dump_grid_csv(std::ostream& os, const DdGrid& grid) {
  for (Eigen::Index m = 0; m < grid.rows(); ++m) {
    for (Eigen::Index k = 0; k < grid.cols(); ++k) {
      const cplx v = grid(m, k);
      if (k) os << ',';
      os << v.real() << (v.imag() < 0 ? '-' : '+') << std::abs(v.imag()) << 'j';
    }
    os << '\n';
  }
}

}  // namespace isac
