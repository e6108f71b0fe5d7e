#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "isac/otfs.hpp"
#include "isac/radar.hpp"
#include "isac/scenario.hpp"

namespace isac {

// ---------------------------------------------------------------------------
// Monte-Carlo experiment driver.
//
// One experiment fixes the configs and a master seed and runs `scenes`
// independent scenes against an axis of operating points: either an SNR axis
// (fixed pilot overhead) or an overhead axis (fixed SNR). Three estimators
// run at every (scene, point):
//   ls-genie   LS on the true occupied cells (all beams) - the floor,
//   omp        plain pursuit over the angle-domain dictionary,
//   radar-omp  pursuit seeded by the radar support.
//
// Determinism contract: every random draw is keyed by (master_seed, stream,
// scene, point), so records are a pure function of the config and seed -
// independent of thread count and evaluation order. The per-scene CSV is
// reproducible except for its runtime_ms column; the aggregate CSV contains
// no timings and reproduces byte for byte.
//
// SNR convention: per-observation noise variance is 10^(-snr_db/10) against
// unit total path power (gains are normalized per scene).
// ---------------------------------------------------------------------------

struct EstimatorSettings {
  double growth = 2.0;       // seeded-variant budget = ceil(growth * seed);
                             // the block pipeline sizes by detections instead
  int max_atoms = 0;         // shared atom budget; 0 -> (1+obstacles)*antennas
  double support_noise = 0;  // corrupt_support level for radar-omp seeds
};

struct ExperimentConfig {
  CommConfig comm;
  RadarConfig radar;
  ScenarioConfig scenario;
  RadarProcessing processing;
  EstimatorSettings estimator;

  double eta = 0.2;                  // pilot overhead for the SNR axis
  int guard_rows = 8;
  std::vector<double> snr_db = {10.0};
  std::vector<double> eta_axis;      // non-empty -> overhead axis at snr_db[0]
  int scenes = 100;
  std::uint64_t master_seed = 1;
  int threads = 1;
  int verbosity = 0;

  FrameLayout layout_for(double eta_value) const;
  int resolved_max_atoms() const;
  void validate() const;
};

// Built-in operating points: a CI-sized setup and the full-scale one.
ExperimentConfig desk_preset();
ExperimentConfig paper_preset();

// "desk", "paper", or a JSON file path; file keys overlay the preset named by
// its optional "preset" entry (default "desk"). Schema mirrors the structs;
// see the README.
ExperimentConfig load_config(const std::string& spec);
ExperimentConfig config_from_json_text(const std::string& text);

struct SceneRecord {
  int scene_id = 0;
  std::string estimator;
  double snr_db = 0, eta = 0;
  double nmse = 0, nmse_db = 0;
  int support_size = 0, peaks_detected = 0;
  double runtime_ms = 0;
};

struct AggregateRow {
  std::string estimator;
  double snr_db = 0, eta = 0;
  double mean_nmse = 0, mean_nmse_db = 0;
  int scenes = 0;  // records entering the mean
  int failed = 0;  // estimator failures (NaN records)
};

struct SweepResult {
  std::vector<SceneRecord> records;      // scene-major, fixed estimator order
  std::vector<AggregateRow> aggregate;   // axis-major, fixed estimator order
};

SweepResult sweep(const ExperimentConfig& cfg);

void write_scene_csv(std::ostream& os, const std::vector<SceneRecord>& records);
void write_aggregate_csv(std::ostream& os,
                         const std::vector<AggregateRow>& rows);

// Convenience: run sweep() and write "<prefix>_scenes.csv" and
// "<prefix>_aggregate.csv".
SweepResult sweep_to_files(const ExperimentConfig& cfg,
                           const std::string& prefix);

}  // namespace isac
