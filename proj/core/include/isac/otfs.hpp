#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

#include "isac/common.hpp"

namespace isac {

// ---------------------------------------------------------------------------
// Delay-Doppler (DD) modem.
//
// A DD grid is an M x N complex matrix: rows index delay (equivalently,
// subcarrier after the delay-axis DFT), columns index Doppler. Storage is
// fftshifted along Doppler: column k carries Doppler tap n = k - N/2, so DC
// sits in column N/2 and column 0 is the most negative tap. All code below
// works in storage columns; the k <-> n offset only matters where physical
// Doppler frequencies enter or leave (tap quantization, sensing hand-off).
//
// Signal chain per antenna (all DFTs unitary):
//   X_ft = F_M * X_dd * F_N^H        (DD -> frequency-time)
//   X_dt = F_M^H * X_ft              (per-column IDFT -> delay-time)
//   s    = vec(X_dt with a cyclic prefix prepended to each column)
// and the receive side mirrors it: strip CP per column, F_M forward,
// F_M^H back... i.e. Y_dd = Y_dt * F_N.
// ---------------------------------------------------------------------------

using DdGrid = Eigen::MatrixXcd;

struct CommConfig {
  int delay_bins = 64;            // M: grid delay dimension (subcarriers)
  int doppler_bins = 8;           // N: grid Doppler dimension (symbols/frame), even
  int cp_len = 16;                // cyclic prefix samples per symbol
  double subcarrier_hz = 30e3;    // subcarrier spacing
  double carrier_hz = 24e9;       // carrier frequency
  int antennas = 8;               // BS uplink array size (ULA)
  double spacing = 0.5;           // array element spacing / carrier wavelength

  int symbol_samples() const { return delay_bins + cp_len; }
  int frame_samples() const { return symbol_samples() * doppler_bins; }
  double sample_rate_hz() const { return delay_bins * subcarrier_hz; }
  // Symbol duration including CP; the frame spans doppler_bins of these.
  double symbol_duration_s() const { return symbol_samples() / sample_rate_hz(); }
  double frame_duration_s() const { return symbol_duration_s() * doppler_bins; }
  // Grid step sizes: one delay tap = one sample period, one Doppler tap =
  // 1 / frame duration.
  double delay_tap_s() const { return 1.0 / sample_rate_hz(); }
  double doppler_tap_hz() const { return 1.0 / frame_duration_s(); }
  double wavelength_m() const { return kSpeedOfLight / carrier_hz; }

  void validate() const;  // throws ConfigError
};

// Pilot/guard arrangement along the delay axis of the transmit grid:
//   rows [0, pilot_rows)                      pilot symbols
//   rows [pilot_rows, pilot_rows+guard_rows)  zero guard
//   rows [.., delay_bins - guard_rows)        data
//   rows [delay_bins - guard_rows, delay_bins) zero guard
// The top guard absorbs pilot leakage into the data region; the bottom one
// makes the channel's circular delay shifts of the pilot block land on zeros,
// so observation rows [0, pilot_rows) see pilot energy only.
struct FrameLayout {
  int pilot_rows = 13;   // M_p
  int guard_rows = 8;    // M_g; also the delay extent of the recovery grid

  double overhead() const;  // pilot_rows / M is fixed by ctor use; see impl
  int data_rows(const CommConfig& cfg) const {
    return cfg.delay_bins - pilot_rows - 2 * guard_rows;
  }
  int observations(const CommConfig& cfg) const {
    return pilot_rows * cfg.doppler_bins;
  }
  void validate(const CommConfig& cfg) const;  // throws ConfigError

  // pilot_rows = round(eta * delay_bins), guard unchanged.
  static FrameLayout from_overhead(double eta, const CommConfig& cfg, int guard_rows);
};

// Position of DD cell (delay row m, storage column k) inside a vectorized
// observation or grid with doppler_bins columns: row-major over (m, k).
inline int grid_index(int m, int k, int doppler_bins) {
  return m * doppler_bins + k;
}

// --- modem -------------------------------------------------------------------

// DD grid(s) -> per-antenna discrete-time frame of frame_samples().
Eigen::VectorXcd modulate(const DdGrid& x_dd, const CommConfig& cfg);
std::vector<Eigen::VectorXcd> modulate(const std::vector<DdGrid>& x_dd,
                                       const CommConfig& cfg);

// Received frame -> DD grid (single receive chain).
DdGrid demodulate(const Eigen::VectorXcd& r, const CommConfig& cfg);

// Intermediate-domain views, mostly for tests and debugging.
DdGrid dd_to_freq_time(const DdGrid& x_dd);   // F_M * X * F_N^H
DdGrid dd_to_delay_time(const DdGrid& x_dd);  // X * F_N^H

// --- frame assembly -----------------------------------------------------------

// Per-antenna pilot blocks (pilot_rows x N each), i.i.d. QPSK.
std::vector<DdGrid> make_pilot_block(const FrameLayout& layout,
                                     const CommConfig& cfg,
                                     std::mt19937_64& rng);

// Assemble full M x N transmit grids from pilot and data blocks; guard rows
// are zeroed. data[a] must be data_rows x N (data_rows may be 0).
std::vector<DdGrid> build_frame(const std::vector<DdGrid>& pilots,
                                const std::vector<DdGrid>& data,
                                const FrameLayout& layout,
                                const CommConfig& cfg);

// Convenience: QPSK pilots + QPSK data, both drawn from rng.
std::vector<DdGrid> random_frame(const FrameLayout& layout,
                                 const CommConfig& cfg,
                                 std::mt19937_64& rng);

// Pilot-region observation vector: rows [0, pilot_rows) of a received DD
// grid, laid out by grid_index(m, k, N).
Eigen::VectorXcd extract_observations(const DdGrid& y_dd,
                                      const FrameLayout& layout);

// CSV dump (rows = delay, columns = Doppler, entries re<sign>imj).
void dump_grid_csv(std::ostream& os, const DdGrid& grid);

}  // namespace isac
