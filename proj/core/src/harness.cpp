#include "isac/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string_view>
#include <thread>

#include <json.hpp>

#include "isac/dd_channel.hpp"
#include "isac/recovery.hpp"
#include "isac/sensing_bridge.hpp"
#include "isac/sparse_problem.hpp"

namespace isac {

namespace {

// Seed stream ids; changing these invalidates recorded baselines.
enum Stream : std::uint64_t {
  kFrameStream = 1,
  kSceneStream = 2,
  kRadarNoiseStream = 3,
  kCommNoiseStream = 4,
  kSupportStream = 5,
};

const char* const kEstimators[] = {"ls-genie", "omp", "radar-omp"};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double to_db(double nmse) {
  return 10.0 * std::log10(std::max(nmse, 1e-30));
}

}  // namespace

FrameLayout ExperimentConfig::layout_for(double eta_value) const {
  return FrameLayout::from_overhead(eta_value, comm, guard_rows);
}

int ExperimentConfig::resolved_max_atoms() const {
  if (estimator.max_atoms > 0) return estimator.max_atoms;
  // A scatterer's energy spans a whole beam fan, so the nominal support is
  // one fan per potential propagation path (line of sight plus one bounce
  // per obstacle).
  return (1 + scenario.obstacles) * comm.antennas;
}

void ExperimentConfig::validate() const {
  comm.validate();
  radar.validate();
  scenario.validate();
  processing.map_cfar.validate();
  if (estimator.growth < 1.0)
    throw ConfigError("ExperimentConfig: estimator.growth must be >= 1");
  if (estimator.support_noise < 0 || estimator.support_noise > 1)
    throw ConfigError("ExperimentConfig: support_noise must be in [0, 1]");
  if (snr_db.empty()) throw ConfigError("ExperimentConfig: empty snr_db");
  layout_for(eta).validate(comm);
  for (double e : eta_axis) layout_for(e).validate(comm);
  if (scenes < 1) throw ConfigError("ExperimentConfig: scenes must be >= 1");
  if (threads < 1) throw ConfigError("ExperimentConfig: threads must be >= 1");
}

ExperimentConfig desk_preset() {
  ExperimentConfig cfg;  // struct defaults are the desk operating point
  cfg.snr_db = {0, 5, 10, 15, 20};
  cfg.scenes = 100;
  return cfg;
}

ExperimentConfig paper_preset() {
  ExperimentConfig cfg;

  cfg.comm.delay_bins = 256;
  cfg.comm.doppler_bins = 14;
  cfg.comm.cp_len = 64;
  cfg.comm.subcarrier_hz = 15e3;
  cfg.comm.carrier_hz = 6e9;
  cfg.comm.antennas = 32;
  cfg.comm.spacing = 0.5;

  cfg.radar.start_freq_hz = 28e9;
  cfg.radar.slope_hz_per_s = 30e12;
  cfg.radar.sample_rate_hz = 30e6;
  cfg.radar.samples_per_chirp = 512;
  cfg.radar.chirps = 256;
  cfg.radar.rx_antennas = 16;
  cfg.radar.chirp_interval_s = 22e-6;
  cfg.radar.spacing = 0.5;
  cfg.radar.angle_bins = 64;

  // The tight radar delay span (fs/S = 1 us) keeps total path lengths under
  // ~150 m, so the scene shrinks to a short urban block.
  cfg.scenario.ue_x_min = -40;
  cfg.scenario.ue_x_max = 40;
  cfg.scenario.ue_y_min = 20;
  cfg.scenario.ue_y_max = 60;
  cfg.scenario.obs_x_min = -45;
  cfg.scenario.obs_x_max = 45;
  cfg.scenario.obs_y_min = 10;
  cfg.scenario.obs_y_max = 50;
  cfg.scenario.obstacles = 4;

  cfg.eta = 0.2;
  cfg.guard_rows = 20;
  cfg.snr_db = {0, 5, 10, 15, 20};
  cfg.scenes = 200;
  return cfg;
}

// ---- JSON ------------------------------------------------------------------

namespace {

using nlohmann::json;

void check_keys(const json& j, const char* section,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : allowed)
      if (item.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw ConfigError(std::string("config: unknown key '") + item.key() +
                        "' in section " + section);
  }
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

void overlay(const json& j, CommConfig& c) {
  check_keys(j, "comm",
             {"delay_bins", "doppler_bins", "cp_len", "subcarrier_hz",
              "carrier_hz", "antennas", "spacing"});
  maybe(j, "delay_bins", c.delay_bins);
  maybe(j, "doppler_bins", c.doppler_bins);
  maybe(j, "cp_len", c.cp_len);
  maybe(j, "subcarrier_hz", c.subcarrier_hz);
  maybe(j, "carrier_hz", c.carrier_hz);
  maybe(j, "antennas", c.antennas);
  maybe(j, "spacing", c.spacing);
}

void overlay(const json& j, RadarConfig& c) {
  check_keys(j, "radar",
             {"start_freq_hz", "slope_hz_per_s", "sample_rate_hz",
              "samples_per_chirp", "chirps", "rx_antennas", "chirp_interval_s",
              "spacing", "angle_bins"});
  maybe(j, "start_freq_hz", c.start_freq_hz);
  maybe(j, "slope_hz_per_s", c.slope_hz_per_s);
  maybe(j, "sample_rate_hz", c.sample_rate_hz);
  maybe(j, "samples_per_chirp", c.samples_per_chirp);
  maybe(j, "chirps", c.chirps);
  maybe(j, "rx_antennas", c.rx_antennas);
  maybe(j, "chirp_interval_s", c.chirp_interval_s);
  maybe(j, "spacing", c.spacing);
  maybe(j, "angle_bins", c.angle_bins);
}

void overlay(const json& j, ScenarioConfig& c) {
  check_keys(j, "scenario",
             {"ue_x_min", "ue_x_max", "ue_y_min", "ue_y_max", "obs_x_min",
              "obs_x_max", "obs_y_min", "obs_y_max", "speed_min", "speed_max",
              "obstacles", "p_visible", "bounce_loss_db", "bounce_jitter_db",
              "clutter_gain_db", "radar_snr_db", "max_resamples"});
  maybe(j, "ue_x_min", c.ue_x_min);
  maybe(j, "ue_x_max", c.ue_x_max);
  maybe(j, "ue_y_min", c.ue_y_min);
  maybe(j, "ue_y_max", c.ue_y_max);
  maybe(j, "obs_x_min", c.obs_x_min);
  maybe(j, "obs_x_max", c.obs_x_max);
  maybe(j, "obs_y_min", c.obs_y_min);
  maybe(j, "obs_y_max", c.obs_y_max);
  maybe(j, "speed_min", c.speed_min);
  maybe(j, "speed_max", c.speed_max);
  maybe(j, "obstacles", c.obstacles);
  maybe(j, "p_visible", c.p_visible);
  maybe(j, "bounce_loss_db", c.bounce_loss_db);
  maybe(j, "bounce_jitter_db", c.bounce_jitter_db);
  maybe(j, "clutter_gain_db", c.clutter_gain_db);
  maybe(j, "radar_snr_db", c.radar_snr_db);
  maybe(j, "max_resamples", c.max_resamples);
}

void overlay(const json& j, CfarParams& c) {
  check_keys(j, "cfar", {"train", "guard", "pfa", "rank"});
  maybe(j, "train", c.train);
  maybe(j, "guard", c.guard);
  maybe(j, "pfa", c.pfa);
  maybe(j, "rank", c.rank);
}

void overlay(const json& j, RadarProcessing& c) {
  check_keys(j, "processing", {"map_cfar", "map_nms_window"});
  if (j.contains("map_cfar")) overlay(j.at("map_cfar"), c.map_cfar);
  maybe(j, "map_nms_window", c.map_nms_window);
}

void overlay(const json& j, EstimatorSettings& c) {
  check_keys(j, "estimator", {"growth", "max_atoms", "support_noise"});
  maybe(j, "growth", c.growth);
  maybe(j, "max_atoms", c.max_atoms);
  maybe(j, "support_noise", c.support_noise);
}

}  // namespace

ExperimentConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: JSON parse error: ") + e.what());
  }

  check_keys(j, "(top level)",
             {"preset", "comm", "radar", "scenario", "processing", "estimator",
              "eta", "guard_rows", "snr_db", "eta_axis", "scenes",
              "master_seed", "threads"});

  std::string preset = "desk";
  maybe(j, "preset", preset);
  ExperimentConfig cfg;
  if (preset == "desk")
    cfg = desk_preset();
  else if (preset == "paper")
    cfg = paper_preset();
  else
    throw ConfigError("config: unknown preset '" + preset + "'");

  if (j.contains("comm")) overlay(j.at("comm"), cfg.comm);
  if (j.contains("radar")) overlay(j.at("radar"), cfg.radar);
  if (j.contains("scenario")) overlay(j.at("scenario"), cfg.scenario);
  if (j.contains("processing")) overlay(j.at("processing"), cfg.processing);
  if (j.contains("estimator")) overlay(j.at("estimator"), cfg.estimator);
  maybe(j, "eta", cfg.eta);
  maybe(j, "guard_rows", cfg.guard_rows);
  maybe(j, "snr_db", cfg.snr_db);
  maybe(j, "eta_axis", cfg.eta_axis);
  maybe(j, "scenes", cfg.scenes);
  maybe(j, "master_seed", cfg.master_seed);
  maybe(j, "threads", cfg.threads);

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& spec) {
  if (spec == "desk") return desk_preset();
  if (spec == "paper") return paper_preset();
  std::ifstream in(spec);
  if (!in) throw ConfigError("config: cannot open '" + spec + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json_text(ss.str());
}

// ---- sweep -----------------------------------------------------------------

namespace {

struct AxisPoint {
  double snr_db = 0;
  double eta = 0;
};

struct PointContext {
  AxisPoint point;
  FrameLayout layout;
  std::vector<Eigen::VectorXcd> tx;
  Eigen::MatrixXcd psi_tilde;
  double noise_var = 0;
};

// Everything run_scene produces for one scene across all points.
std::vector<SceneRecord> run_scene(int scene_id, const ExperimentConfig& cfg,
                                   const std::vector<PointContext>& points) {
  std::vector<SceneRecord> out;
  const FrameLayout& base_layout = points.front().layout;

  std::mt19937_64 scene_rng =
      make_rng(cfg.master_seed, {kSceneStream, static_cast<std::uint64_t>(scene_id)});
  const Scene scene =
      sample_scene(scene_rng, cfg.scenario, cfg.comm, cfg.radar, base_layout);

  // Radar leg: one cube per scene, shared by every operating point.
  std::mt19937_64 radar_rng = make_rng(
      cfg.master_seed, {kRadarNoiseStream, static_cast<std::uint64_t>(scene_id)});
  const Cube cube = synthesize_cube(radar_paths(scene), cfg.radar,
                                    radar_noise_var(cfg.scenario), radar_rng);
  const RadarResult radar = process_cube(cube, cfg.radar, cfg.processing);

  SupportSet seed = peaks_to_support(radar.peaks, cfg.comm, base_layout);
  if (cfg.estimator.support_noise > 0) {
    std::mt19937_64 support_rng = make_rng(
        cfg.master_seed, {kSupportStream, static_cast<std::uint64_t>(scene_id)});
    seed = corrupt_support(seed, cfg.estimator.support_noise, cfg.comm,
                           base_layout, support_rng);
  }
  const std::vector<std::vector<int>> seed_regions =
      support_cell_regions(seed, cfg.comm, base_layout);

  // Ground truth (same delay extent at every point).
  const DdChannel chan =
      dd_channel_tensor(comm_paths(scene, cfg.comm), cfg.comm, cfg.guard_rows);
  const Eigen::VectorXcd h_true =
      to_angle_domain(vectorize_channel(chan), cfg.comm.antennas);

  std::vector<int> genie;
  for (int m = 0; m < chan.delay_taps; ++m)
    for (int k = 0; k < chan.doppler_bins; ++k) {
      bool occupied = false;
      for (int a = 0; a < chan.antennas; ++a)
        if (chan.at(m, k, a) != cplx(0, 0)) {
          occupied = true;
          break;
        }
      if (occupied)
        for (int f = 0; f < chan.antennas; ++f)
          genie.push_back(chan.index(m, k, f));
    }

  const int max_atoms = cfg.resolved_max_atoms();

  for (std::size_t p = 0; p < points.size(); ++p) {
    const PointContext& ctx = points[p];
    std::mt19937_64 noise_rng = make_rng(
        cfg.master_seed, {kCommNoiseStream, static_cast<std::uint64_t>(scene_id),
                          static_cast<std::uint64_t>(p)});
    const Eigen::VectorXcd r = apply_channel(ctx.tx, chan, cfg.comm,
                                             ctx.noise_var, noise_rng);
    const Eigen::VectorXcd y =
        extract_observations(demodulate(r, cfg.comm), ctx.layout);
    const double eps =
        noise_floor_eps(ctx.noise_var, ctx.layout.observations(cfg.comm));

    for (const char* name : kEstimators) {
      SceneRecord rec;
      rec.scene_id = scene_id;
      rec.estimator = name;
      rec.snr_db = ctx.point.snr_db;
      rec.eta = ctx.point.eta;
      rec.peaks_detected = static_cast<int>(radar.peaks.size());

      const auto t0 = std::chrono::steady_clock::now();
      try {
        EstimatorResult est;
        if (std::string_view(name) == "ls-genie")
          est = ls_on_support(y, ctx.psi_tilde, genie);
        else if (std::string_view(name) == "omp")
          est = omp(y, ctx.psi_tilde, max_atoms, eps);
        else
          est = radar_aided_block_omp(y, ctx.psi_tilde, seed_regions,
                                      cfg.comm.antennas, eps, max_atoms);
        rec.nmse = nmse(est.coeffs, h_true);
        rec.nmse_db = to_db(rec.nmse);
        rec.support_size = static_cast<int>(est.support.size());
      } catch (const std::exception&) {
        rec.nmse = std::numeric_limits<double>::quiet_NaN();
        rec.nmse_db = std::numeric_limits<double>::quiet_NaN();
        rec.support_size = 0;
      }
      const auto t1 = std::chrono::steady_clock::now();
      rec.runtime_ms =
          std::chrono::duration<double, std::milli>(t1 - t0).count();
      out.push_back(std::move(rec));
    }
  }
  return out;
}

}  // namespace

SweepResult sweep(const ExperimentConfig& cfg) {
  cfg.validate();

  std::vector<AxisPoint> axis;
  if (cfg.eta_axis.empty()) {
    for (double s : cfg.snr_db) axis.push_back({s, cfg.eta});
  } else {
    for (double e : cfg.eta_axis) axis.push_back({cfg.snr_db.front(), e});
  }

  // Shared per-point state: frame, oracle dictionary (angle domain), layout.
  std::vector<PointContext> points;
  points.reserve(axis.size());
  for (const AxisPoint& pt : axis) {
    PointContext ctx;
    ctx.point = pt;
    ctx.layout = cfg.layout_for(pt.eta);
    std::mt19937_64 frame_rng = make_rng(cfg.master_seed, {kFrameStream});
    const std::vector<DdGrid> frame =
        random_frame(ctx.layout, cfg.comm, frame_rng);
    ctx.tx = modulate(frame, cfg.comm);
    ctx.psi_tilde = dictionary_to_angle(
        probe_dictionary(frame, ctx.layout, cfg.comm, cfg.threads),
        cfg.comm.antennas);
    ctx.noise_var = std::pow(10.0, -pt.snr_db / 10.0);
    if (cfg.verbosity >= 1)
      std::cerr << "[sweep] dictionary ready for snr=" << pt.snr_db
                << " eta=" << pt.eta << " (" << ctx.psi_tilde.rows() << "x"
                << ctx.psi_tilde.cols() << ")\n";
    points.push_back(std::move(ctx));
  }

  std::vector<std::vector<SceneRecord>> per_scene(
      static_cast<std::size_t>(cfg.scenes));
  std::atomic<int> next{0};
  std::atomic<int> done{0};
  std::mutex log_mu;

  auto worker = [&]() {
    for (;;) {
      const int s = next.fetch_add(1);
      if (s >= cfg.scenes) return;
      per_scene[static_cast<std::size_t>(s)] = run_scene(s, cfg, points);
      const int d = done.fetch_add(1) + 1;
      if (cfg.verbosity >= 1) {
        std::lock_guard<std::mutex> lock(log_mu);
        std::cerr << "[sweep] scene " << d << "/" << cfg.scenes << "\n";
      }
    }
  };

  const int n_workers = std::min(cfg.threads, cfg.scenes);
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  SweepResult result;
  for (const auto& rows : per_scene)
    result.records.insert(result.records.end(), rows.begin(), rows.end());

  // Aggregate: mean linear NMSE per (estimator, point), failures excluded.
  for (std::size_t p = 0; p < axis.size(); ++p) {
    for (const char* name : kEstimators) {
      AggregateRow row;
      row.estimator = name;
      row.snr_db = axis[p].snr_db;
      row.eta = axis[p].eta;
      double acc = 0;
      for (const SceneRecord& rec : result.records) {
        if (rec.estimator != name || rec.snr_db != axis[p].snr_db ||
            rec.eta != axis[p].eta)
          continue;
        if (std::isnan(rec.nmse)) {
          ++row.failed;
          continue;
        }
        acc += rec.nmse;
        ++row.scenes;
      }
      row.mean_nmse = row.scenes > 0 ? acc / row.scenes : 0.0;
      row.mean_nmse_db = to_db(row.mean_nmse);
      result.aggregate.push_back(std::move(row));
    }
  }
  return result;
}

void write_scene_csv(std::ostream& os, const std::vector<SceneRecord>& records) {
  os << "scene_id,estimator,snr_db,eta,nmse,nmse_db,support_size,"
        "peaks_detected,runtime_ms\n";
  for (const SceneRecord& r : records) {
    os << r.scene_id << ',' << r.estimator << ',' << fmt("%g", r.snr_db) << ','
       << fmt("%g", r.eta) << ',' << fmt("%.12g", r.nmse) << ','
       << fmt("%.12g", r.nmse_db) << ',' << r.support_size << ','
       << r.peaks_detected << ',' << fmt("%.3f", r.runtime_ms) << '\n';
  }
}

void write_aggregate_csv(std::ostream& os,
                         const std::vector<AggregateRow>& rows) {
  os << "estimator,snr_db,eta,mean_nmse,mean_nmse_db,scenes,failed\n";
  for (const AggregateRow& r : rows) {
    os << r.estimator << ',' << fmt("%g", r.snr_db) << ',' << fmt("%g", r.eta)
       << ',' << fmt("%.12g", r.mean_nmse) << ','
       << fmt("%.12g", r.mean_nmse_db) << ',' << r.scenes << ',' << r.failed
       << '\n';
  }
}

SweepResult sweep_to_files(const ExperimentConfig& cfg,
                           const std::string& prefix) {
  SweepResult result = sweep(cfg);
  {
    std::ofstream os(prefix + "_scenes.csv");
    if (!os) throw ConfigError("sweep: cannot write " + prefix + "_scenes.csv");
    write_scene_csv(os, result.records);
  }
  {
    std::ofstream os(prefix + "_aggregate.csv");
    if (!os)
      throw ConfigError("sweep: cannot write " + prefix + "_aggregate.csv");
    write_aggregate_csv(os, result.aggregate);
  }
  return result;
}

}  // namespace isac
