#include "isac/radar.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>

#include "isac/dft.hpp"

namespace isac {

void RadarConfig::validate() const {
  if (start_freq_hz <= 0 || slope_hz_per_s <= 0 || sample_rate_hz <= 0)
    throw ConfigError("RadarConfig: frequencies and slope must be positive");
  if (samples_per_chirp < 2) throw ConfigError("RadarConfig: samples_per_chirp < 2");
  if (chirps < 2 || chirps % 2 != 0)
    throw ConfigError("RadarConfig: chirps must be even and >= 2");
  if (rx_antennas < 1) throw ConfigError("RadarConfig: rx_antennas < 1");
  if (spacing <= 0) throw ConfigError("RadarConfig: spacing must be positive");
  if (angle_bins < rx_antennas || angle_bins % 2 != 0)
    throw ConfigError("RadarConfig: angle_bins must be even and >= rx_antennas");
  if (chirp_interval_s < chirp_duration_s())
    throw ConfigError("RadarConfig: chirp interval shorter than the chirp itself");
}

RadarDerived derived_params(const RadarConfig& cfg) {
  cfg.validate();
  RadarDerived d;
  d.range_res_m = kSpeedOfLight / (2.0 * cfg.bandwidth_hz());
  d.max_range_m = (cfg.samples_per_chirp - 1) * d.range_res_m;
  d.vel_res_mps = cfg.wavelength_m() / (2.0 * cfg.chirps * cfg.chirp_interval_s);
  d.max_vel_mps = cfg.wavelength_m() / (4.0 * cfg.chirp_interval_s);
  return d;
}

double Cube::norm() const {
  double acc = 0;
  for (const cplx& x : v) acc += std::norm(x);
  return std::sqrt(acc);
}

namespace {

Cube synthesize_impl(const std::vector<RadarPath>& paths,
                     const RadarConfig& cfg) {
  cfg.validate();
  const RadarDerived lim = derived_params(cfg);
  Cube cube;
  cube.samples = cfg.samples_per_chirp;
  cube.chirps = cfg.chirps;
  cube.antennas = cfg.rx_antennas;
  cube.v.assign(static_cast<std::size_t>(cube.size()), cplx(0, 0));

  Eigen::VectorXcd chirp_wave(cube.samples);
  std::vector<cplx> steer(static_cast<std::size_t>(cube.antennas));

  for (const RadarPath& path : paths) {
    if (path.delay_s < 0 || path.delay_s >= cfg.max_delay_s())
      throw ConfigError("synthesize_cube: delay outside the unambiguous span");
    if (std::abs(path.velocity_mps) >= lim.max_vel_mps)
      throw ConfigError("synthesize_cube: |velocity| " +
                        std::to_string(path.velocity_mps) +
                        " at or beyond the unambiguous limit");
    if (std::abs(path.dir_cos) > 1.0)
      throw ConfigError("synthesize_cube: |direction cosine| > 1");

    for (int b = 0; b < cube.antennas; ++b)
      steer[static_cast<std::size_t>(b)] =
          std::polar(1.0, -2.0 * kPi * cfg.spacing * b * path.dir_cos);

    for (int n = 0; n < cube.chirps; ++n) {
      // Delay slides between chirps; within one chirp it is held fixed.
      const double tau_n = path.delay_s + 2.0 * path.velocity_mps * n *
                                              cfg.chirp_interval_s /
                                              kSpeedOfLight;
      const cplx carrier =
          path.amplitude * std::polar(1.0, 2.0 * kPi * cfg.start_freq_hz * tau_n);
      const cplx beat_step = std::polar(
          1.0, 2.0 * kPi * cfg.slope_hz_per_s * tau_n / cfg.sample_rate_hz);
      cplx rot(1.0, 0.0);
      for (int q = 0; q < cube.samples; ++q) {
        chirp_wave(q) = carrier * rot;
        rot *= beat_step;
      }
      for (int b = 0; b < cube.antennas; ++b)
        Eigen::Map<Eigen::VectorXcd>(cube.v.data() + cube.index(0, n, b),
                                     cube.samples) +=
            steer[static_cast<std::size_t>(b)] * chirp_wave;
    }
  }
  return cube;
}

}  // namespace

Cube synthesize_cube(const std::vector<RadarPath>& paths,
                     const RadarConfig& cfg) {
  return synthesize_impl(paths, cfg);
}

Cube synthesize_cube(const std::vector<RadarPath>& paths,
                     const RadarConfig& cfg, double noise_var,
                     std::mt19937_64& rng) {
  if (noise_var < 0) throw ConfigError("synthesize_cube: negative noise variance");
  Cube cube = synthesize_impl(paths, cfg);
  if (noise_var > 0)
    for (cplx& x : cube.v) x += complex_gaussian(rng, noise_var);
  return cube;
}

Cube clutter_removal(const Cube& cube) {
  Cube out = cube;
  for (int b = 0; b < cube.antennas; ++b) {
    Eigen::Map<Eigen::MatrixXcd> slab(out.v.data() + out.index(0, 0, b),
                                      cube.samples, cube.chirps);
    const Eigen::VectorXcd mean = slab.rowwise().mean();
    slab.colwise() -= mean;
  }
  return out;
}

namespace {

// Periodic 4-term Blackman-Harris window (-92 dB sidelobes), scaled to unit
// coherent gain so an on-bin sinusoid keeps its unwindowed DFT peak value.
Eigen::VectorXd unit_gain_window(int len) {
  constexpr double a0 = 0.35875, a1 = 0.48829, a2 = 0.14128, a3 = 0.01168;
  Eigen::VectorXd w(len);
  for (int i = 0; i < len; ++i) {
    const double t = 2.0 * kPi * i / len;
    w(i) = (a0 - a1 * std::cos(t) + a2 * std::cos(2 * t) -
            a3 * std::cos(3 * t)) / a0;
  }
  return w;
}

}  // namespace

MagCube spectrum_3d(const Cube& cube, const RadarConfig& cfg) {
  cfg.validate();
  if (cube.samples != cfg.samples_per_chirp || cube.chirps != cfg.chirps ||
      cube.antennas != cfg.rx_antennas)
    throw ConfigError("spectrum_3d: cube shape does not match config");

  const int n_rng = cube.samples;
  const int n_dop = cube.chirps;
  const int n_ant = cube.antennas;
  const int n_beam = cfg.angle_bins;

  // Range axis: windowed forward DFT down the fast-time columns.
  Eigen::MatrixXcd f_rng = raw_dft(n_rng);
  f_rng *= unit_gain_window(n_rng).asDiagonal();
  Eigen::MatrixXcd stage1(n_rng, n_dop * n_ant);
  stage1.noalias() =
      f_rng * Eigen::Map<const Eigen::MatrixXcd>(cube.v.data(), n_rng,
                                                 n_dop * n_ant);

  // Doppler axis: windowed forward DFT with the output rows pre-shifted so
  // that bin chirps/2 is zero velocity.
  const Eigen::VectorXd w_dop = unit_gain_window(n_dop);
  Eigen::MatrixXcd k_dop(n_dop, n_dop);
  for (int d = 0; d < n_dop; ++d) {
    const int src = fftshift_src(d, n_dop);
    for (int n = 0; n < n_dop; ++n)
      k_dop(d, n) = w_dop(n) * std::polar(1.0, -2.0 * kPi *
                                                   static_cast<double>(src) *
                                                   n / n_dop);
  }
  Eigen::MatrixXcd stage2(n_rng, n_dop * n_ant);
  for (int b = 0; b < n_ant; ++b)
    stage2.middleCols(b * n_dop, n_dop).noalias() =
        stage1.middleCols(b * n_dop, n_dop) * k_dop.transpose();

  // Angle axis: conjugate kernel (increasing bin = increasing cosine),
  // zero-padded to angle_bins, shifted so bin angle_bins/2 is broadside.
  Eigen::MatrixXcd k_ang(n_beam, n_ant);
  for (int k = 0; k < n_beam; ++k) {
    const int src = fftshift_src(k, n_beam);
    for (int b = 0; b < n_ant; ++b)
      k_ang(k, b) = std::polar(1.0, 2.0 * kPi * static_cast<double>(src) * b / n_beam);
  }
  Eigen::MatrixXcd stage3(n_rng * n_dop, n_beam);
  stage3.noalias() = Eigen::Map<const Eigen::MatrixXcd>(
                         stage2.data(), n_rng * n_dop, n_ant) *
                     k_ang.transpose();

  MagCube spec;
  spec.ranges = n_rng;
  spec.dopplers = n_dop;
  spec.angles = n_beam;
  spec.v.resize(static_cast<std::size_t>(n_rng) * n_dop * n_beam);
  Eigen::Map<Eigen::ArrayXd>(spec.v.data(), static_cast<Eigen::Index>(spec.v.size())) =
      Eigen::Map<const Eigen::ArrayXcd>(stage3.data(), stage3.size()).abs();
  return spec;
}

Eigen::MatrixXd range_doppler_map(const MagCube& spec) {
  // Greatest-of projection over beams: a point return occupies one beam's
  // mainlobe, so averaging across beams would dilute its contrast while
  // leaving the noise floor untouched.
  Eigen::MatrixXd map = Eigen::MatrixXd::Zero(spec.ranges, spec.dopplers);
  for (int k = 0; k < spec.angles; ++k) {
    Eigen::Map<const Eigen::MatrixXd> slab(
        spec.v.data() + static_cast<std::ptrdiff_t>(spec.index(0, 0, k)),
        spec.ranges, spec.dopplers);
    map = map.cwiseMax(slab);
  }
  return map;
}

void CfarParams::validate() const {
  if (train < 1) throw ConfigError("CfarParams: train must be >= 1");
  if (guard < 0) throw ConfigError("CfarParams: guard must be >= 0");
  if (pfa <= 0 || pfa >= 1) throw ConfigError("CfarParams: pfa must be in (0, 1)");
  if (rank <= 0 || rank > 1)
    throw ConfigError("CfarParams: rank must be in (0, 1]");
}

double os_cfar_alpha(double pfa, int n, int k) {
  if (n < 1 || k < 1 || k > n)
    throw ConfigError("os_cfar_alpha: need 1 <= k <= n");
  if (pfa <= 0 || pfa >= 1)
    throw ConfigError("os_cfar_alpha: pfa must be in (0, 1)");
  const double target = std::log(pfa);
  const auto log_pfa = [n, k](double alpha) {
    double s = 0;
    for (int i = 0; i < k; ++i)
      s += std::log(static_cast<double>(n - i)) -
           std::log(static_cast<double>(n - i) + alpha);
    return s;
  };
  double lo = 0, hi = 1;
  while (log_pfa(hi) > target) hi *= 2;
  for (int it = 0; it < 200 && (hi - lo) > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (log_pfa(mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

// Rank index for n training cells: the ceil(rank * n)-th smallest, clamped.
int rank_index(double rank, int n) {
  return std::max(1, std::min(n, static_cast<int>(std::ceil(rank * n))));
}

// Threshold factors depend only on (n, k); cache them across cells because
// the training count varies near map edges.
class AlphaCache {
 public:
  explicit AlphaCache(double pfa) : pfa_(pfa) {}
  double get(int n, int k) {
    const auto [it, inserted] = vals_.try_emplace({n, k}, 0.0);
    if (inserted) it->second = os_cfar_alpha(pfa_, n, k);
    return it->second;
  }

 private:
  double pfa_;
  std::map<std::pair<int, int>, double> vals_;
};

}  // namespace

std::vector<MapCell> cfar_2d(const Eigen::MatrixXd& map, const CfarParams& p) {
  p.validate();
  const int rows = static_cast<int>(map.rows());
  const int cols = static_cast<int>(map.cols());
  const int outer = p.train + p.guard;
  AlphaCache alphas(p.pfa);
  std::vector<double> train;
  train.reserve(static_cast<std::size_t>(2 * outer + 1) * (2 * outer + 1));

  std::vector<MapCell> hits;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      train.clear();
      for (int a = std::max(0, i - outer); a <= std::min(rows - 1, i + outer); ++a)
        for (int b = std::max(0, j - outer); b <= std::min(cols - 1, j + outer); ++b) {
          if (std::abs(a - i) <= p.guard && std::abs(b - j) <= p.guard) continue;
          train.push_back(map(a, b));
        }
      const int t_n = static_cast<int>(train.size());
      if (t_n < 1) continue;  // degenerate window, nothing to estimate from
      const int k = rank_index(p.rank, t_n);
      std::nth_element(train.begin(), train.begin() + (k - 1), train.end());
      const double noise = train[static_cast<std::size_t>(k - 1)];
      if (map(i, j) > alphas.get(t_n, k) * noise) hits.push_back({i, j});
    }
  }
  return hits;
}

std::vector<MapCell> nms_2d(const Eigen::MatrixXd& map,
                            const std::vector<MapCell>& cells, int window) {
  if (window < 1) throw ConfigError("nms_2d: window must be >= 1");
  const int rows = static_cast<int>(map.rows());
  const int cols = static_cast<int>(map.cols());
  std::vector<MapCell> keep;
  for (const MapCell& c : cells) {
    const double v = map(c.range_bin, c.doppler_bin);
    bool is_max = true;
    for (int i = std::max(0, c.range_bin - window);
         is_max && i <= std::min(rows - 1, c.range_bin + window); ++i) {
      for (int j = std::max(0, c.doppler_bin - window);
           j <= std::min(cols - 1, c.doppler_bin + window); ++j) {
        if (i == c.range_bin && j == c.doppler_bin) continue;
        const double w = map(i, j);
        // Strictly larger neighbors win; equal neighbors win only if they
        // come earlier in row-major scan order.
        if (w > v || (w == v && (i < c.range_bin ||
                                 (i == c.range_bin && j < c.doppler_bin)))) {
          is_max = false;
          break;
        }
      }
    }
    if (is_max) keep.push_back(c);
  }
  return keep;
}

RadarPeak bins_to_physical(const DetectedPeak& cell, const RadarConfig& cfg) {
  cfg.validate();
  if (cell.range_bin < 0 || cell.range_bin >= cfg.samples_per_chirp ||
      cell.doppler_bin < 0 || cell.doppler_bin >= cfg.chirps ||
      cell.angle_bin < 0 || cell.angle_bin >= cfg.angle_bins)
    throw ConfigError("bins_to_physical: bin index out of range");

  RadarPeak peak;
  peak.delay_s = cell.range_bin * cfg.sample_rate_hz /
                 (cfg.slope_hz_per_s * cfg.samples_per_chirp);
  peak.range_m = peak.delay_s * kSpeedOfLight / 2.0;
  peak.velocity_mps = (cell.doppler_bin - cfg.chirps / 2) * cfg.wavelength_m() /
                      (2.0 * cfg.chirps * cfg.chirp_interval_s);
  peak.dir_cos =
      (cell.angle_bin - cfg.angle_bins / 2) / (cfg.spacing * cfg.angle_bins);
  peak.magnitude = cell.magnitude;
  return peak;
}

RadarResult process_cube(const Cube& cube, const RadarConfig& cfg,
                         const RadarProcessing& proc) {
  RadarResult out;
  const Cube notched = clutter_removal(cube);
  out.spectrum = spectrum_3d(notched, cfg);
  out.rd_map = range_doppler_map(out.spectrum);
  out.map_cells =
      nms_2d(out.rd_map, cfar_2d(out.rd_map, proc.map_cfar), proc.map_nms_window);

  // One direction per detection: the beam with the largest response through
  // the cell. Padded beams beyond the physical aperture are skipped.
  std::vector<DetectedPeak> found;
  for (const MapCell& cell : out.map_cells) {
    DetectedPeak det{cell.range_bin, cell.doppler_bin, 0, -1.0};
    for (int k = 0; k < out.spectrum.angles; ++k) {
      const double v = out.spectrum.at(cell.range_bin, cell.doppler_bin, k);
      if (v > det.magnitude) {
        det.magnitude = v;
        det.angle_bin = k;
      }
    }
    if (std::abs(bins_to_physical(det, cfg).dir_cos) > 1.0) continue;
    found.push_back(det);
  }
  // Strongest first; scan order breaks ties so the result is reproducible.
  std::stable_sort(found.begin(), found.end(),
                   [](const DetectedPeak& a, const DetectedPeak& b) {
                     return a.magnitude > b.magnitude;
                   });
  out.peaks.reserve(found.size());
  for (const DetectedPeak& det : found)
    out.peaks.push_back(bins_to_physical(det, cfg));
  return out;
}

}  // namespace isac
