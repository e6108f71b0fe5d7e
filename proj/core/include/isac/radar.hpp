#pragma once

#include <Eigen/Dense>
#include <vector>

#include "isac/common.hpp"

namespace isac {

// ---------------------------------------------------------------------------
// FMCW MIMO radar front end co-located with the BS array.
//
// The IF data cube is indexed (fast-time sample q, chirp n, rx element b).
// A point return with two-way delay tau, radial velocity v (positive =
// receding, defined so that tau advances by 2*v*T_p/c per chirp) and
// direction cosine theta contributes
//   amp * exp(j*2*pi*f0*tau(n)) * exp(j*2*pi*S*tau(n)*q/fs)
//       * exp(-j*2*pi*spacing*b*theta),      tau(n) = tau + 2*v*n*T_p/c.
// Processing: per-(q,b) mean over chirps removed (static clutter), then a
// 3-D DFT (range and Doppler axes under a low-sidelobe window so off-grid
// returns do not carpet the spectrum; Doppler shifted so the middle bin is
// zero velocity; angle: conjugate kernel zero-padded to angle_bins, shifted
// so the middle bin is broadside), magnitudes, beam-max range-Doppler map,
// OS-CFAR + local-maxima selection in the map, then a beam argmax through
// each surviving cell to read the direction. Detection lives in range-Doppler
// because point returns stay point-like there, while the short antenna
// aperture would paint whole rows of a range-angle view; order-statistic
// noise estimates keep a strong return inside the training window from
// masking weaker ones.
// ---------------------------------------------------------------------------

struct RadarConfig {
  double start_freq_hz = 24e9;     // chirp start frequency f0
  double slope_hz_per_s = 2.5e12;  // chirp slope S
  double sample_rate_hz = 20e6;    // IF sample rate fs
  int samples_per_chirp = 128;     // N_s fast-time samples
  int chirps = 64;                 // N_loop chirps per frame
  int rx_antennas = 8;             // B rx elements (ULA)
  double chirp_interval_s = 8e-6;  // T_p chirp-to-chirp period
  double spacing = 0.5;            // element spacing / radar wavelength
  int angle_bins = 64;             // zero-padded angle axis length

  double chirp_duration_s() const { return samples_per_chirp / sample_rate_hz; }
  double bandwidth_hz() const { return slope_hz_per_s * chirp_duration_s(); }
  double wavelength_m() const { return kSpeedOfLight / start_freq_hz; }
  // Largest two-way delay whose beat frequency stays below fs.
  double max_delay_s() const { return sample_rate_hz / slope_hz_per_s; }

  void validate() const;  // throws ConfigError
};

struct RadarDerived {
  double range_res_m = 0;  // c / (2 * bandwidth)
  double max_range_m = 0;  // center of the last range bin
  double vel_res_mps = 0;  // lambda / (2 * chirps * T_p)
  double max_vel_mps = 0;  // unambiguous limit lambda / (4 * T_p)
};

RadarDerived derived_params(const RadarConfig& cfg);

struct RadarPath {
  cplx amplitude;          // complex return amplitude
  double delay_s = 0;      // two-way propagation delay
  double velocity_mps = 0; // radial velocity, positive receding
  double dir_cos = 0;      // direction cosine at the rx array
  bool is_static = false;  // e.g. building returns; removed by the notch
};

// Complex IF cube, fast-time fastest: v[(b*chirps + n)*samples + q].
struct Cube {
  int samples = 0, chirps = 0, antennas = 0;
  std::vector<cplx> v;

  int size() const { return samples * chirps * antennas; }
  int index(int q, int n, int b) const { return (b * chirps + n) * samples + q; }
  cplx& at(int q, int n, int b) { return v[static_cast<std::size_t>(index(q, n, b))]; }
  cplx at(int q, int n, int b) const { return v[static_cast<std::size_t>(index(q, n, b))]; }
  double norm() const;
};

// Magnitude spectrum, range fastest: v[(k*dopplers + d)*ranges + q].
struct MagCube {
  int ranges = 0, dopplers = 0, angles = 0;
  std::vector<double> v;

  int index(int q, int d, int k) const { return (k * dopplers + d) * ranges + q; }
  double at(int q, int d, int k) const { return v[static_cast<std::size_t>(index(q, d, k))]; }
};

Cube synthesize_cube(const std::vector<RadarPath>& paths,
                     const RadarConfig& cfg);
Cube synthesize_cube(const std::vector<RadarPath>& paths,
                     const RadarConfig& cfg, double noise_var,
                     std::mt19937_64& rng);

// Subtract the per-(sample, antenna) mean across chirps; zero-Doppler returns
// cancel exactly, moving returns keep nearly all their energy.
Cube clutter_removal(const Cube& cube);

// 3-D DFT magnitudes with the axis conventions described above. Fast-time
// and chirp axes are windowed (unit coherent gain, so a bin-centered return
// keeps amplitude |a| * samples * chirps * rx at its cell); the short antenna
// axis stays unwindowed to preserve angular resolution.
MagCube spectrum_3d(const Cube& cube, const RadarConfig& cfg);

// Range-Doppler magnitude map (ranges x dopplers): per cell, the maximum
// over the beam axis, so a point return keeps its full beamformed contrast.
Eigen::MatrixXd range_doppler_map(const MagCube& spec);

// --- detection --------------------------------------------------------------

struct CfarParams {
  int train = 8;      // training cells per side (per axis)
  int guard = 2;      // guard cells per side (per axis)
  double pfa = 1e-4;  // design false-alarm probability per cell
  double rank = 0.75; // order-statistic rank fraction of the training window

  void validate() const;
};

// Order-statistic threshold factor: the alpha for which an exponential test
// cell exceeds alpha times the k-th smallest of n exponential training cells
// with probability pfa,
//   pfa = prod_{i=0}^{k-1} (n - i) / (n - i + alpha),
// solved numerically. Rank-based noise estimates tolerate strong returns in
// the training window, unlike the cell-averaging mean.
double os_cfar_alpha(double pfa, int n, int k);

struct MapCell {
  int range_bin = 0;
  int doppler_bin = 0;
};

struct DetectedPeak {
  int range_bin = 0;
  int doppler_bin = 0;
  int angle_bin = 0;
  double magnitude = 0;  // spectrum value at the cell
};

// OS-CFAR over a 2-D map with a square training ring (truncated at edges,
// rank index and threshold factor recomputed from the actual training count
// per cell).
std::vector<MapCell> cfar_2d(const Eigen::MatrixXd& map, const CfarParams& p);

// Keep cells that are the maximum of the map within a (2w+1)^2 neighborhood;
// on ties the earlier cell in row-major scan order wins.
std::vector<MapCell> nms_2d(const Eigen::MatrixXd& map,
                            const std::vector<MapCell>& cells, int window);

// Physical peak parameters recovered from bin indices.
struct RadarPeak {
  double delay_s = 0;       // two-way
  double range_m = 0;       // delay_s * c / 2
  double velocity_mps = 0;  // positive receding
  double dir_cos = 0;
  double magnitude = 0;
};

using PeakSet = std::vector<RadarPeak>;

RadarPeak bins_to_physical(const DetectedPeak& cell, const RadarConfig& cfg);

// --- orchestration ------------------------------------------------------------

struct RadarProcessing {
  CfarParams map_cfar{8, 2, 1e-4, 0.75};
  int map_nms_window = 2;
};

struct RadarResult {
  MagCube spectrum;
  Eigen::MatrixXd rd_map;
  std::vector<MapCell> map_cells;  // survivors of the 2-D stage
  PeakSet peaks;
};

// clutter_removal -> spectrum_3d -> range_doppler_map -> cfar_2d -> nms_2d ->
// per-cell beam argmax (a point return has one direction) ->
// bins_to_physical, sorted strongest first.
RadarResult process_cube(const Cube& cube, const RadarConfig& cfg,
                         const RadarProcessing& proc);

}  // namespace isac
