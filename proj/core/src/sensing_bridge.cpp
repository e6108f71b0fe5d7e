#include "isac/sensing_bridge.hpp"

#include <algorithm>
#include <cmath>

#include "isac/dd_channel.hpp"

namespace isac {

std::vector<double> normalize_delay(const PeakSet& peaks) {
  std::vector<double> out;
  if (peaks.empty()) return out;
  double first = peaks.front().delay_s;
  for (const RadarPeak& p : peaks) first = std::min(first, p.delay_s);
  out.reserve(peaks.size());
  for (const RadarPeak& p : peaks) out.push_back((p.delay_s - first) / 2.0);
  return out;
}

double to_doppler_freq(double velocity_mps, const CommConfig& cfg) {
  return -(velocity_mps / 2.0) * cfg.carrier_hz / kSpeedOfLight;
}

int angle_to_beam_index(double dir_cos, const CommConfig& cfg) {
  cfg.validate();
  if (std::abs(dir_cos) > 1.0)
    throw ConfigError("angle_to_beam_index: |direction cosine| > 1");
  const int ants = cfg.antennas;
  int best = 0;
  double best_gain = -1.0;
  for (int f = 0; f < ants; ++f) {
    cplx acc(0, 0);
    for (int a = 0; a < ants; ++a)
      acc += std::polar(1.0, -2.0 * kPi * (static_cast<double>(f) * a / ants +
                                           cfg.spacing * a * dir_cos));
    const double gain = std::norm(acc);
    if (gain > best_gain + 1e-12 * std::max(1.0, best_gain)) {
      best_gain = gain;
      best = f;
    }
  }
  return best;
}

namespace {

void insert_entry(SupportSet& set, const SupportEntry& entry) {
  const auto it =
      std::lower_bound(set.indices.begin(), set.indices.end(), entry.index);
  if (it != set.indices.end() && *it == entry.index) return;  // merged
  set.indices.insert(it, entry.index);
  set.entries.push_back(entry);
}

}  // namespace

SupportSet peaks_to_support(const PeakSet& peaks, const CommConfig& cfg,
                            const FrameLayout& layout) {
  cfg.validate();
  layout.validate(cfg);
  SupportSet set;
  if (peaks.empty()) return set;

  const std::vector<double> delays = normalize_delay(peaks);
  const int half = cfg.doppler_bins / 2;

  for (std::size_t i = 0; i < peaks.size(); ++i) {
    const int m = static_cast<int>(
        std::llround(delays[i] * cfg.sample_rate_hz()));
    const double doppler = to_doppler_freq(peaks[i].velocity_mps, cfg);
    const int n = static_cast<int>(
        std::llround(doppler * cfg.frame_duration_s()));
    if (m < 0 || m >= layout.guard_rows || n < -half || n > half - 1) {
      ++set.dropped;
      continue;
    }
    SupportEntry entry;
    entry.delay_tap = m;
    entry.doppler_tap = n;
    entry.beam = angle_to_beam_index(peaks[i].dir_cos, cfg);
    entry.peak_id = static_cast<int>(i);
    entry.index = DdChannel::cell_index(m, n + half, entry.beam,
                                        cfg.doppler_bins, cfg.antennas);
    insert_entry(set, entry);
  }
  return set;
}

std::vector<std::vector<int>> support_cell_regions(const SupportSet& support,
                                                    const CommConfig& cfg,
                                                    const FrameLayout& layout) {
  cfg.validate();
  layout.validate(cfg);
  const int half = cfg.doppler_bins / 2;
  const int ants = cfg.antennas;

  std::vector<std::vector<int>> regions;
  regions.reserve(support.entries.size());
  for (const SupportEntry& e : support.entries) {
    std::vector<int> region;
    auto push_cell = [&](int m, int n) {
      region.push_back(
          DdChannel::cell_index(m, n + half, 0, cfg.doppler_bins, ants));
    };
    push_cell(e.delay_tap, e.doppler_tap);
    for (int dm : {-1, 1}) {
      const int m = e.delay_tap + dm;
      if (m >= 0 && m < layout.guard_rows) push_cell(m, e.doppler_tap);
    }
    for (int dn : {-1, 1}) {
      const int n = e.doppler_tap + dn;
      if (n >= -half && n <= half - 1) push_cell(e.delay_tap, n);
    }
    regions.push_back(std::move(region));
  }
  return regions;
}

SupportSet corrupt_support(const SupportSet& support, double level,
                           const CommConfig& cfg, const FrameLayout& layout,
                           std::mt19937_64& rng) {
  if (level < 0 || level > 1)
    throw ConfigError("corrupt_support: level must be in [0, 1]");
  if (level == 0) return support;

  SupportSet out;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int half = cfg.doppler_bins / 2;
  for (const SupportEntry& entry : support.entries) {
    const double roll = unit(rng);
    SupportEntry e = entry;
    if (roll < level / 2) {
      ++out.dropped;
      continue;
    }
    if (roll < level) {
      e.delay_tap += (unit(rng) < 0.5) ? -1 : 1;
      if (e.delay_tap < 0 || e.delay_tap >= layout.guard_rows) {
        ++out.dropped;
        continue;
      }
      e.index = DdChannel::cell_index(e.delay_tap, e.doppler_tap + half, e.beam,
                                      cfg.doppler_bins, cfg.antennas);
    }
    insert_entry(out, e);
  }
  return out;
}

}  // namespace isac
