#pragma once

#include <Eigen/Dense>
#include <vector>

#include "isac/common.hpp"
#include "isac/dd_channel.hpp"
#include "isac/otfs.hpp"
#include "isac/radar.hpp"

namespace isac {

// ---------------------------------------------------------------------------
// Random street-scale scenes tying the two sensors together.
//
// Fixed frame: BS (and the co-located radar) at the origin, arrays along +x,
// scene in the upper half plane. A scene has one moving user and a set of
// static obstacles; obstacles marked visible carry a single-bounce comm path
// user -> obstacle -> BS. Every obstacle also returns radar clutter
// BS -> obstacle -> BS regardless of visibility.
//
// The same geometry feeds both path lists:
//   comm: excess delay (length - LoS length)/c, Doppler -f_c * rate / c,
//         gains power-normalized over the scene;
//   radar: two-way delay 2*length/c, velocity 2*rate (the echo rides the
//          user's path out and back, so its Doppler reads the path rate
//          twice), strongest moving return scaled to amplitude 1 and noise
//          set radar_snr_db below it.
// rate is d(path length)/dt, positive when the path stretches.
// ---------------------------------------------------------------------------

struct ScenarioConfig {
  double ue_x_min = -120, ue_x_max = 120;   // user box, meters
  double ue_y_min = 40, ue_y_max = 350;
  double obs_x_min = -150, obs_x_max = 150; // obstacle box
  double obs_y_min = 20, obs_y_max = 380;
  double speed_min = 50, speed_max = 90;    // user speed, m/s
  int obstacles = 3;
  double p_visible = 0.8;          // obstacle bounces comm energy
  double bounce_loss_db = 6;       // extra comm loss of a bounced path
  double bounce_jitter_db = 6;     // + uniform[0, this] per path
  double clutter_gain_db = 10;     // clutter strength over the 1/L^2 baseline
  double radar_snr_db = 30;        // per-sample SNR of strongest moving return
  int max_resamples = 200;

  void validate() const;
};

struct ScenePath {
  double length_m = 0;   // one-way propagation length
  double rate_mps = 0;   // d(length)/dt
  double aod_cos = 0;    // direction cosine at the BS
  cplx comm_gain;        // normalized comm amplitude
  cplx radar_gain;       // anchored radar echo amplitude
  bool is_los = false;
  int obstacle = -1;     // bounce obstacle id, -1 for LoS
};

struct SceneClutter {
  double length_m = 0;   // BS -> obstacle
  double aod_cos = 0;
  cplx radar_gain;
};

struct Scene {
  Eigen::Vector2d ue_pos = Eigen::Vector2d::Zero();
  Eigen::Vector2d ue_vel = Eigen::Vector2d::Zero();
  std::vector<Eigen::Vector2d> obstacle_pos;
  std::vector<ScenePath> paths;      // LoS first, then visible bounces
  std::vector<SceneClutter> clutter; // one per obstacle
  int resamples = 0;                 // rejected draws before this scene
};

// Draw a scene whose paths fit both sensors' unambiguous spans and the comm
// recovery grid; rejected draws are counted in Scene::resamples. Throws
// ConfigError after max_resamples straight rejections.
Scene sample_scene(std::mt19937_64& rng, const ScenarioConfig& scfg,
                   const CommConfig& comm, const RadarConfig& radar,
                   const FrameLayout& layout);

// Projections of the scene truth onto each sensor's path parameterization.
std::vector<PathParams> comm_paths(const Scene& scene, const CommConfig& comm);
std::vector<RadarPath> radar_paths(const Scene& scene);

// Per-sample radar noise variance implied by the anchored amplitudes.
double radar_noise_var(const ScenarioConfig& scfg);

}  // namespace isac
