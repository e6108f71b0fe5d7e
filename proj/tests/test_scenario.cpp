#include <doctest.h>

#include <cmath>

#include "isac/scenario.hpp"
#include "test_util.hpp"

using namespace isac;

TEST_SUITE_BEGIN("scenario");

namespace {

struct Setup {
  ScenarioConfig scfg;
  CommConfig comm = test_util::desk_comm();
  RadarConfig radar;
  FrameLayout layout = test_util::desk_layout();
};

Scene draw(Setup& s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_scene(rng, s.scfg, s.comm, s.radar, s.layout);
}

}  // namespace

TEST_CASE("scenes respect the configured geometry and spans") {
  Setup s;
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const Scene scene = draw(s, seed);

    CHECK(scene.ue_pos.x() >= s.scfg.ue_x_min);
    CHECK(scene.ue_pos.x() <= s.scfg.ue_x_max);
    CHECK(scene.ue_pos.y() >= s.scfg.ue_y_min);
    CHECK(scene.ue_pos.y() <= s.scfg.ue_y_max);
    const double speed = scene.ue_vel.norm();
    CHECK(speed >= s.scfg.speed_min - 1e-9);
    CHECK(speed <= s.scfg.speed_max + 1e-9);
    CHECK(static_cast<int>(scene.obstacle_pos.size()) == s.scfg.obstacles);
    CHECK(scene.clutter.size() == scene.obstacle_pos.size());

    REQUIRE(!scene.paths.empty());
    CHECK(scene.paths[0].is_los);
    CHECK(scene.paths[0].obstacle == -1);
    for (std::size_t i = 1; i < scene.paths.size(); ++i) {
      CHECK_FALSE(scene.paths[i].is_los);
      CHECK(scene.paths[i].obstacle >= 0);
      CHECK(scene.paths[i].length_m > scene.paths[0].length_m);
    }

    // every path must fit the comm grid...
    const std::vector<PathParams> cp = comm_paths(scene, s.comm);
    for (const PathParams& p : cp)
      CHECK_NOTHROW(quantize_path(p, s.comm, s.layout.guard_rows));
    // ...and the radar's unambiguous spans
    CHECK_NOTHROW(synthesize_cube(radar_paths(scene), s.radar));
  }
}

TEST_CASE("geometric truth of the path parameters") {
  Setup s;
  const Scene scene = draw(s, 42);

  // LoS length and direction from the stored user state
  const ScenePath& los = scene.paths[0];
  CHECK(los.length_m == doctest::Approx(scene.ue_pos.norm()).epsilon(1e-12));
  CHECK(los.aod_cos ==
        doctest::Approx(scene.ue_pos.x() / scene.ue_pos.norm()).epsilon(1e-12));
  CHECK(los.rate_mps ==
        doctest::Approx(scene.ue_vel.dot(scene.ue_pos.normalized()))
            .epsilon(1e-9));

  for (std::size_t i = 1; i < scene.paths.size(); ++i) {
    const ScenePath& p = scene.paths[i];
    const Eigen::Vector2d obs =
        scene.obstacle_pos[static_cast<std::size_t>(p.obstacle)];
    CHECK(p.length_m == doctest::Approx((scene.ue_pos - obs).norm() +
                                        obs.norm()).epsilon(1e-12));
    CHECK(p.aod_cos == doctest::Approx(obs.x() / obs.norm()).epsilon(1e-12));
    // only the user moves, so the rate is d|ue - obs|/dt
    CHECK(p.rate_mps ==
          doctest::Approx(scene.ue_vel.dot((scene.ue_pos - obs).normalized()))
              .epsilon(1e-9));
  }

  for (std::size_t i = 0; i < scene.clutter.size(); ++i) {
    CHECK(scene.clutter[i].length_m ==
          doctest::Approx(scene.obstacle_pos[i].norm()).epsilon(1e-12));
    CHECK(scene.clutter[i].aod_cos ==
          doctest::Approx(scene.obstacle_pos[i].x() /
                          scene.obstacle_pos[i].norm()).epsilon(1e-12));
  }
}

TEST_CASE("comm gains carry unit total power") {
  Setup s;
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    const Scene scene = draw(s, seed);
    double power = 0;
    for (const ScenePath& p : scene.paths) power += std::norm(p.comm_gain);
    CHECK(power == doctest::Approx(1.0).epsilon(1e-12));
    // the LoS path is the strongest by construction of the bounce losses
    for (std::size_t i = 1; i < scene.paths.size(); ++i)
      CHECK(std::abs(scene.paths[i].comm_gain) <
            std::abs(scene.paths[0].comm_gain));
  }
}

TEST_CASE("projected comm paths use excess delay and opposite-sign Doppler") {
  Setup s;
  const Scene scene = draw(s, 7);
  const std::vector<PathParams> cp = comm_paths(scene, s.comm);
  REQUIRE(cp.size() == scene.paths.size());
  CHECK(cp[0].delay_s == 0.0);
  for (std::size_t i = 0; i < cp.size(); ++i) {
    CHECK(cp[i].delay_s ==
          doctest::Approx((scene.paths[i].length_m - scene.paths[0].length_m) /
                          kSpeedOfLight).epsilon(1e-12));
    CHECK(cp[i].doppler_hz ==
          doctest::Approx(-s.comm.carrier_hz * scene.paths[i].rate_mps /
                          kSpeedOfLight).epsilon(1e-12));
    CHECK(cp[i].aod_cos == scene.paths[i].aod_cos);
    CHECK(cp[i].gain == scene.paths[i].comm_gain);
  }
}

TEST_CASE("projected radar returns are two-way and anchored") {
  Setup s;
  const Scene scene = draw(s, 8);
  const std::vector<RadarPath> rp = radar_paths(scene);
  REQUIRE(rp.size() == scene.paths.size() + scene.clutter.size());

  double strongest_moving = 0;
  for (std::size_t i = 0; i < scene.paths.size(); ++i) {
    CHECK(rp[i].delay_s ==
          doctest::Approx(2.0 * scene.paths[i].length_m / kSpeedOfLight)
              .epsilon(1e-12));
    CHECK(rp[i].velocity_mps ==
          doctest::Approx(2.0 * scene.paths[i].rate_mps).epsilon(1e-12));
    CHECK_FALSE(rp[i].is_static);
    strongest_moving = std::max(strongest_moving, std::abs(rp[i].amplitude));
  }
  CHECK(strongest_moving == doctest::Approx(1.0).epsilon(1e-12));

  for (std::size_t i = 0; i < scene.clutter.size(); ++i) {
    const RadarPath& c = rp[scene.paths.size() + i];
    CHECK(c.is_static);
    CHECK(c.velocity_mps == 0.0);
    CHECK(c.delay_s ==
          doctest::Approx(2.0 * scene.clutter[i].length_m / kSpeedOfLight)
              .epsilon(1e-12));
  }

  CHECK(radar_noise_var(s.scfg) == doctest::Approx(1e-3).epsilon(1e-12));
}

TEST_CASE("scene draws are reproducible and seed-sensitive") {
  Setup s;
  const Scene a = draw(s, 77);
  const Scene b = draw(s, 77);
  CHECK(a.ue_pos == b.ue_pos);
  CHECK(a.ue_vel == b.ue_vel);
  REQUIRE(a.paths.size() == b.paths.size());
  for (std::size_t i = 0; i < a.paths.size(); ++i)
    CHECK(a.paths[i].comm_gain == b.paths[i].comm_gain);

  const Scene c = draw(s, 78);
  CHECK(a.ue_pos != c.ue_pos);
}

TEST_CASE("visibility probability is honored across many scenes") {
  Setup s;
  s.scfg.p_visible = 0.5;
  int bounces = 0, total = 0;
  for (std::uint64_t seed = 1000; seed < 1120; ++seed) {
    const Scene scene = draw(s, seed);
    bounces += static_cast<int>(scene.paths.size()) - 1;
    total += s.scfg.obstacles;
  }
  const double frac = static_cast<double>(bounces) / total;
  // rejection resampling biases this a little; keep wide 99% bounds
  CHECK(frac > 0.35);
  CHECK(frac < 0.65);

  s.scfg.p_visible = 0.0;
  const Scene lone = draw(s, 5);
  CHECK(lone.paths.size() == 1);
}

TEST_CASE("impossible geometry exhausts the resample budget") {
  Setup s;
  // user box entirely beyond the radar's unambiguous delay (1.2 km two-way)
  s.scfg.ue_y_min = 1500;
  s.scfg.ue_y_max = 1600;
  s.scfg.max_resamples = 25;
  std::mt19937_64 rng(3);
  CHECK_THROWS_AS(sample_scene(rng, s.scfg, s.comm, s.radar, s.layout),
                  ConfigError);
}

TEST_SUITE_END();
