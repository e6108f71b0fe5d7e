#pragma once

#include <vector>

#include "isac/common.hpp"
#include "isac/otfs.hpp"
#include "isac/radar.hpp"

namespace isac {

// ---------------------------------------------------------------------------
// Hand-off from radar detections to communication-channel support.
//
// Radar peaks live in two-way delay / radial velocity / direction cosine;
// the channel estimator wants dictionary cells (delay tap, Doppler tap,
// beam). The conversions:
//   * delay: radar delays are two-way and absolute, the comm channel is
//     referenced to its first arrival, so subtract the earliest peak delay
//     and halve;
//   * Doppler: a radar return bouncing off the user's signal path sees the
//     geometry twice, so its velocity reads ~2x the path's range rate, and a
//     receding path (positive radar velocity) has negative comm Doppler:
//     nu = -(v/2) * f_c / c;
//   * angle: pick the array DFT beam whose response to the peak's steering
//     vector is strongest.
// ---------------------------------------------------------------------------

struct SupportEntry {
  int index = 0;        // dictionary column, DdChannel::cell_index order
  int delay_tap = 0;    // m'
  int doppler_tap = 0;  // n', physical (storage column - N/2)
  int beam = 0;         // angle-domain bin f
  int peak_id = 0;      // position in the originating PeakSet
};

struct SupportSet {
  std::vector<int> indices;           // unique, ascending
  std::vector<SupportEntry> entries;  // one per retained peak, peak order
  int dropped = 0;                    // peaks that mapped outside the grid

  bool empty() const { return indices.empty(); }
};

// Two-way absolute peak delays -> first-arrival-referenced one-way delays.
std::vector<double> normalize_delay(const PeakSet& peaks);

// Radar radial velocity -> comm Doppler shift (see sign discussion above).
double to_doppler_freq(double velocity_mps, const CommConfig& cfg);

// Beam index whose DFT response to a unit steering vector at this direction
// cosine is strongest (ties -> smallest index).
int angle_to_beam_index(double dir_cos, const CommConfig& cfg);

// Full mapping. Peaks quantizing outside the delay/Doppler grid are dropped
// (and counted); duplicate cells are merged keeping the first occurrence,
// so with magnitude-ordered peaks the strongest wins.
SupportSet peaks_to_support(const PeakSet& peaks, const CommConfig& cfg,
                            const FrameLayout& layout);

// Robustness-study corruption: each entry is dropped with probability
// level/2 and has its delay tap shifted by +-1 with probability level/2
// (shifts leaving the grid become drops). level = 0 is a no-op.
SupportSet corrupt_support(const SupportSet& support, double level,
                           const CommConfig& cfg, const FrameLayout& layout,
                           std::mt19937_64& rng);

// One candidate region per support entry: the dictionary blocks a detected
// return nominates to the block estimator. The radar pins a return's
// delay-Doppler cell (its bins are several times finer than the comm grid),
// but a true parameter near a cell boundary can round to either side, so the
// region lists the mapped cell plus its +-1 delay/Doppler neighbors - delay
// clipped to the guard span, Doppler to the grid. Each candidate is given as
// the cell's base column (beam 0); a physical direction rarely falls on a
// DFT beam center, so a scatterer's energy spans the cell's whole beam fan,
// which is why the estimator treats the fan as one block and the radar's
// angle estimate is not used to narrow it. Regions follow entry order; each
// starts with its mapped cell.
std::vector<std::vector<int>> support_cell_regions(const SupportSet& support,
                                                   const CommConfig& cfg,
                                                   const FrameLayout& layout);

}  // namespace isac
