#include "isac/scenario.hpp"

#include <cmath>

namespace isac {

void ScenarioConfig::validate() const {
  if (ue_x_min >= ue_x_max || ue_y_min >= ue_y_max || obs_x_min >= obs_x_max ||
      obs_y_min >= obs_y_max)
    throw ConfigError("ScenarioConfig: degenerate sampling box");
  if (ue_y_min <= 0 || obs_y_min <= 0)
    throw ConfigError("ScenarioConfig: boxes must sit in front of the array");
  if (speed_min < 0 || speed_min > speed_max)
    throw ConfigError("ScenarioConfig: bad speed range");
  if (obstacles < 0) throw ConfigError("ScenarioConfig: negative obstacle count");
  if (p_visible < 0 || p_visible > 1)
    throw ConfigError("ScenarioConfig: p_visible must be in [0, 1]");
  if (max_resamples < 1) throw ConfigError("ScenarioConfig: max_resamples < 1");
}

double radar_noise_var(const ScenarioConfig& scfg) {
  return std::pow(10.0, -scfg.radar_snr_db / 10.0);
}

namespace {

struct Draw {
  Eigen::Vector2d ue_pos, ue_vel;
  double los_comm_phase = 0, ue_radar_phase = 0;
  std::vector<Eigen::Vector2d> obs;
  std::vector<char> visible;
  std::vector<double> bounce_extra_db;   // comm bounce loss incl. jitter
  std::vector<double> comm_phase, radar_phase, clutter_phase;
};

// All randomness of one attempt, in one fixed draw order.
Draw draw_candidate(std::mt19937_64& rng, const ScenarioConfig& scfg) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto in_range = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  Draw d;
  d.ue_pos = {in_range(scfg.ue_x_min, scfg.ue_x_max),
              in_range(scfg.ue_y_min, scfg.ue_y_max)};
  const double speed = in_range(scfg.speed_min, scfg.speed_max);
  const double heading = in_range(0.0, 2.0 * kPi);
  d.ue_vel = {speed * std::cos(heading), speed * std::sin(heading)};
  d.los_comm_phase = in_range(0.0, 2.0 * kPi);
  d.ue_radar_phase = in_range(0.0, 2.0 * kPi);

  d.obs.resize(static_cast<std::size_t>(scfg.obstacles));
  d.visible.resize(d.obs.size());
  d.bounce_extra_db.resize(d.obs.size());
  d.comm_phase.resize(d.obs.size());
  d.radar_phase.resize(d.obs.size());
  d.clutter_phase.resize(d.obs.size());
  for (std::size_t i = 0; i < d.obs.size(); ++i) {
    d.obs[i] = {in_range(scfg.obs_x_min, scfg.obs_x_max),
                in_range(scfg.obs_y_min, scfg.obs_y_max)};
    d.visible[i] = unit(rng) < scfg.p_visible;
    d.bounce_extra_db[i] =
        scfg.bounce_loss_db + in_range(0.0, scfg.bounce_jitter_db);
    d.comm_phase[i] = in_range(0.0, 2.0 * kPi);
    d.radar_phase[i] = in_range(0.0, 2.0 * kPi);
    d.clutter_phase[i] = in_range(0.0, 2.0 * kPi);
  }
  return d;
}

// Geometry of one candidate; returns false when any path falls outside a
// sensor's unambiguous span or the comm grid.
bool realize(const Draw& d, const ScenarioConfig& scfg, const CommConfig& comm,
             const RadarConfig& radar, const FrameLayout& layout, Scene& out) {
  const RadarDerived lim = derived_params(radar);
  const double los_len = d.ue_pos.norm();
  if (los_len < 1.0) return false;

  struct Raw {
    double length, rate, aod_cos, comm_amp_db, radar_amp;
    double comm_phase, radar_phase;
    bool is_los;
    int obstacle;
  };
  std::vector<Raw> raws;

  const double los_rate = d.ue_pos.dot(d.ue_vel) / los_len;
  raws.push_back({los_len, los_rate, d.ue_pos.x() / los_len, 0.0,
                  1.0 / (los_len * los_len), d.los_comm_phase,
                  d.ue_radar_phase, true, -1});

  for (std::size_t i = 0; i < d.obs.size(); ++i) {
    if (!d.visible[i]) continue;
    const Eigen::Vector2d& r = d.obs[i];
    const double leg_bs = r.norm();
    const Eigen::Vector2d to_ue = d.ue_pos - r;
    const double leg_ue = to_ue.norm();
    if (leg_bs < 1.0 || leg_ue < 1.0) return false;
    const double length = leg_bs + leg_ue;
    const double rate = to_ue.dot(d.ue_vel) / leg_ue;  // obstacle static
    raws.push_back({length, rate, r.x() / leg_bs, -d.bounce_extra_db[i],
                    std::pow(10.0, -d.bounce_extra_db[i] / 20.0) /
                        (length * length),
                    d.comm_phase[i], d.radar_phase[i], false,
                    static_cast<int>(i)});
  }

  // Grid and span checks, with the same rounding the estimator will apply.
  const int half = comm.doppler_bins / 2;
  for (const Raw& p : raws) {
    const double excess_s = (p.length - los_len) / kSpeedOfLight;
    const int m = static_cast<int>(
        std::llround(excess_s * comm.sample_rate_hz()));
    const double doppler = -comm.carrier_hz * p.rate / kSpeedOfLight;
    const int n = static_cast<int>(
        std::llround(doppler * comm.frame_duration_s()));
    if (m < 0 || m >= layout.guard_rows) return false;
    if (n < -half || n > half - 1) return false;
    if (2.0 * p.length / kSpeedOfLight >= radar.max_delay_s()) return false;
    if (std::abs(2.0 * p.rate) >= lim.max_vel_mps) return false;
  }
  for (std::size_t i = 0; i < d.obs.size(); ++i) {
    const double leg = d.obs[i].norm();
    if (leg < 1.0) return false;
    if (4.0 * leg / kSpeedOfLight >= 2.0 * radar.max_delay_s()) return false;
  }

  // Comm gains: 1/length with bounce loss, unit total power.
  double power = 0;
  std::vector<double> comm_amp(raws.size());
  for (std::size_t i = 0; i < raws.size(); ++i) {
    comm_amp[i] = std::pow(10.0, raws[i].comm_amp_db / 20.0) / raws[i].length;
    power += comm_amp[i] * comm_amp[i];
  }
  const double comm_scale = 1.0 / std::sqrt(power);

  // Radar gains: strongest moving return -> amplitude 1.
  double peak = 0;
  for (const Raw& p : raws) peak = std::max(peak, p.radar_amp);
  const double radar_scale = 1.0 / peak;

  out.ue_pos = d.ue_pos;
  out.ue_vel = d.ue_vel;
  out.obstacle_pos = d.obs;
  out.paths.clear();
  out.clutter.clear();
  for (std::size_t i = 0; i < raws.size(); ++i) {
    const Raw& p = raws[i];
    ScenePath sp;
    sp.length_m = p.length;
    sp.rate_mps = p.rate;
    sp.aod_cos = p.aod_cos;
    sp.comm_gain = std::polar(comm_scale * comm_amp[i], p.comm_phase);
    sp.radar_gain = std::polar(radar_scale * p.radar_amp, p.radar_phase);
    sp.is_los = p.is_los;
    sp.obstacle = p.obstacle;
    out.paths.push_back(sp);
  }
  const double clutter_lin = std::pow(10.0, scfg.clutter_gain_db / 20.0);
  for (std::size_t i = 0; i < d.obs.size(); ++i) {
    const double leg = d.obs[i].norm();
    SceneClutter cl;
    cl.length_m = leg;
    cl.aod_cos = d.obs[i].x() / leg;
    cl.radar_gain = std::polar(
        radar_scale * clutter_lin / (leg * leg), d.clutter_phase[i]);
    out.clutter.push_back(cl);
  }
  return true;
}

}  // namespace

Scene sample_scene(std::mt19937_64& rng, const ScenarioConfig& scfg,
                   const CommConfig& comm, const RadarConfig& radar,
                   const FrameLayout& layout) {
  scfg.validate();
  comm.validate();
  radar.validate();
  layout.validate(comm);

  Scene scene;
  for (int attempt = 0; attempt < scfg.max_resamples; ++attempt) {
    const Draw d = draw_candidate(rng, scfg);
    if (realize(d, scfg, comm, radar, layout, scene)) {
      scene.resamples = attempt;
      return scene;
    }
  }
  throw ConfigError("sample_scene: no admissible scene after " +
                    std::to_string(scfg.max_resamples) +
                    " draws; scenario box incompatible with the grids");
}

std::vector<PathParams> comm_paths(const Scene& scene, const CommConfig& comm) {
  if (scene.paths.empty() || !scene.paths.front().is_los)
    throw ConfigError("comm_paths: scene has no leading LoS path");
  const double los_len = scene.paths.front().length_m;
  std::vector<PathParams> paths;
  paths.reserve(scene.paths.size());
  for (const ScenePath& sp : scene.paths) {
    PathParams p;
    p.gain = sp.comm_gain;
    p.delay_s = (sp.length_m - los_len) / kSpeedOfLight;
    p.doppler_hz = -comm.carrier_hz * sp.rate_mps / kSpeedOfLight;
    p.aod_cos = sp.aod_cos;
    paths.push_back(p);
  }
  return paths;
}

std::vector<RadarPath> radar_paths(const Scene& scene) {
  std::vector<RadarPath> paths;
  paths.reserve(scene.paths.size() + scene.clutter.size());
  for (const ScenePath& sp : scene.paths) {
    RadarPath r;
    r.amplitude = sp.radar_gain;
    r.delay_s = 2.0 * sp.length_m / kSpeedOfLight;
    r.velocity_mps = 2.0 * sp.rate_mps;
    r.dir_cos = sp.aod_cos;
    r.is_static = false;
    paths.push_back(r);
  }
  for (const SceneClutter& cl : scene.clutter) {
    RadarPath r;
    r.amplitude = cl.radar_gain;
    r.delay_s = 2.0 * cl.length_m / kSpeedOfLight;
    r.velocity_mps = 0.0;
    r.dir_cos = cl.aod_cos;
    r.is_static = true;
    paths.push_back(r);
  }
  return paths;
}

}  // namespace isac
