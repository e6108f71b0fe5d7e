#include <doctest.h>

#include <cmath>

#include "isac/recovery.hpp"
#include "test_util.hpp"

using namespace isac;

namespace {

// Well-conditioned random dictionary with unit-norm columns.
Eigen::MatrixXcd random_dictionary(int rows, int cols, std::mt19937_64& rng) {
  Eigen::MatrixXcd psi(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i)
      psi(i, j) = complex_gaussian(rng, 1.0);
    psi.col(j).normalize();
  }
  return psi;
}

Eigen::VectorXcd sparse_vector(int cols, const std::vector<int>& support,
                               std::mt19937_64& rng) {
  Eigen::VectorXcd h = Eigen::VectorXcd::Zero(cols);
  for (int idx : support) h(idx) = complex_gaussian(rng, 1.0) + cplx(0.5, 0.5);
  return h;
}

}  // namespace

TEST_SUITE_BEGIN("recovery");

TEST_CASE("pursuit recovers a noiseless sparse vector exactly") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 8; ++trial) {
    const Eigen::MatrixXcd psi = random_dictionary(40, 120, rng);
    const std::vector<int> truth{5, 17, 63, 99};
    const Eigen::VectorXcd h = sparse_vector(120, truth, rng);
    const Eigen::VectorXcd y = psi * h;

    const EstimatorResult res = omp(y, psi, 4, 0.0);
    REQUIRE(res.support.size() == 4);
    std::vector<int> got = res.support;
    std::sort(got.begin(), got.end());
    CHECK(got == truth);
    CHECK(nmse(res.coeffs, h) < 1e-20);
    CHECK(res.residual_norm < 1e-10);
    CHECK(res.iterations == 4);
  }
}

TEST_CASE("early stop at the noise floor bounds the support size") {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXcd psi = random_dictionary(60, 150, rng);
  const std::vector<int> truth{10, 40, 80};
  const Eigen::VectorXcd h = sparse_vector(150, truth, rng);
  Eigen::VectorXcd y = psi * h;
  const double noise_var = 1e-4;
  for (Eigen::Index i = 0; i < y.size(); ++i)
    y(i) += complex_gaussian(rng, noise_var);

  const double eps = noise_floor_eps(noise_var, static_cast<int>(y.size()));
  const EstimatorResult res = omp(y, psi, 30, eps);
  CHECK(res.support.size() <= 6);  // stops near the true sparsity, not at 30
  CHECK(res.residual_norm <= eps * 1.5);
  CHECK(nmse(res.coeffs, h) < 1e-2);
}

TEST_CASE("each refit is a fresh least squares on the whole support") {
  // After k iterations the residual must be orthogonal to every selected
  // column, which only holds if past coefficients are re-estimated.
  std::mt19937_64 rng(7);
  const Eigen::MatrixXcd psi = random_dictionary(30, 80, rng);
  const Eigen::VectorXcd h = sparse_vector(80, {3, 44, 70}, rng);
  const Eigen::VectorXcd y = psi * h;
  const EstimatorResult res = omp(y, psi, 3, 0.0);
  const Eigen::VectorXcd r = y - psi * res.coeffs;
  for (int idx : res.support)
    CHECK(std::abs(psi.col(idx).dot(r)) < 1e-10);
}

TEST_CASE("correlation ties resolve to the smallest column index") {
  Eigen::MatrixXcd psi(4, 3);
  psi.setZero();
  psi(0, 0) = 1;          // columns 0 and 2 are identical
  psi(0, 2) = 1;
  psi(1, 1) = 1;
  Eigen::VectorXcd y(4);
  y << cplx(2, 0), cplx(0, 0), cplx(0, 0), cplx(0, 0);
  const EstimatorResult res = omp(y, psi, 1, 0.0);
  REQUIRE(res.support.size() == 1);
  CHECK(res.support[0] == 0);
}

TEST_CASE("seeded pursuit fits the seed first") {
  std::mt19937_64 rng(11);
  const Eigen::MatrixXcd psi = random_dictionary(50, 140, rng);
  const std::vector<int> truth{12, 30, 77, 102};
  const Eigen::VectorXcd h = sparse_vector(140, truth, rng);
  const Eigen::VectorXcd y = psi * h;

  // complete, correct seed: no pursuit needed
  EstimatorResult res = radar_aided_omp(y, psi, truth, 1.5, 1e-9, 10);
  CHECK_FALSE(res.fallback);
  CHECK(res.iterations == 0);
  CHECK(nmse(res.coeffs, h) < 1e-20);

  // partial seed: pursuit fills in the missing atoms within the budget
  res = radar_aided_omp(y, psi, {12, 30}, 2.0, 1e-9, 10);
  CHECK_FALSE(res.fallback);
  std::vector<int> got = res.support;
  std::sort(got.begin(), got.end());
  CHECK(got == truth);
  CHECK(res.iterations == 2);
  CHECK(nmse(res.coeffs, h) < 1e-20);

  // wrong seed entry stays in the support but the fit still succeeds
  res = radar_aided_omp(y, psi, {12, 30, 55}, 2.0, 1e-9, 10);
  CHECK(nmse(res.coeffs, h) < 1e-18);
}

TEST_CASE("seed budget is proportional to the seed size") {
  std::mt19937_64 rng(13);
  const Eigen::MatrixXcd psi = random_dictionary(50, 140, rng);
  const std::vector<int> truth{12, 30, 77, 102, 121};
  const Eigen::VectorXcd h = sparse_vector(140, truth, rng);
  const Eigen::VectorXcd y = psi * h;

  // total budget ceil(2.0 * 2) = 4 columns -> one short of the sparsity 5
  const EstimatorResult res = radar_aided_omp(y, psi, {12, 30}, 2.0, 0.0, 4);
  CHECK(res.iterations == 2);
  CHECK(res.support.size() == 4);
  CHECK(res.residual_norm > 1e-6);  // three atoms missing, two slots

  // growth 1.0 with no floor pins the support to the seed itself
  const EstimatorResult pinned = radar_aided_omp(y, psi, {12, 30}, 1.0, 0.0, 2);
  CHECK(pinned.iterations == 0);
  CHECK(pinned.support.size() == 2);

  // the floor keeps a sparse seed from strangling the search
  const EstimatorResult floored = radar_aided_omp(y, psi, {12, 30}, 1.0, 0.0, 5);
  CHECK(floored.iterations == 3);
  CHECK(floored.support.size() == 5);
  CHECK(floored.residual_norm < 1e-9);
}

namespace {

// Sparse vector whose nonzeros cover whole blocks.
Eigen::VectorXcd block_vector(int cols, int block,
                              const std::vector<int>& bases,
                              std::mt19937_64& rng, double scale = 1.0) {
  Eigen::VectorXcd h = Eigen::VectorXcd::Zero(cols);
  for (int base : bases)
    for (int f = 0; f < block; ++f)
      h(base + f) = scale * (complex_gaussian(rng, 1.0) + cplx(0.5, 0.5));
  return h;
}

}  // namespace

TEST_CASE("block claiming finds the true cell among its candidates") {
  std::mt19937_64 rng(29);
  const Eigen::MatrixXcd psi = random_dictionary(40, 30, rng);
  // truth occupies the whole blocks at bases 6 and 21
  const Eigen::VectorXcd h = block_vector(30, 3, {6, 21}, rng);
  const Eigen::VectorXcd y = psi * h;

  // each region leads with a wrong cell; the true cell rides as a neighbor
  const std::vector<std::vector<int>> regions{{9, 6, 3}, {24, 21}};
  const EstimatorResult res = radar_aided_block_omp(y, psi, regions, 3, 0.0, 6);
  std::vector<int> got = res.support;
  std::sort(got.begin(), got.end());
  CHECK(got == std::vector<int>{6, 7, 8, 21, 22, 23});
  CHECK(res.iterations == 2);
  CHECK(res.residual_norm < 1e-10);
  CHECK((res.coeffs - Eigen::VectorXcd(h)).norm() < 1e-10);
  CHECK(!res.fallback);
}

TEST_CASE("a block never serves two returns") {
  std::mt19937_64 rng(31);
  const Eigen::MatrixXcd psi = random_dictionary(30, 24, rng);
  Eigen::VectorXcd h = block_vector(24, 3, {6}, rng, 3.0);
  h += block_vector(24, 3, {9}, rng);
  const Eigen::VectorXcd y = psi * h;

  // both returns nominate the same two cells; the claims must split them
  const std::vector<std::vector<int>> regions{{6, 9}, {6, 9}};
  const EstimatorResult res = radar_aided_block_omp(y, psi, regions, 3, 0.0, 6);
  std::vector<int> got = res.support;
  std::sort(got.begin(), got.end());
  CHECK(got == std::vector<int>{6, 7, 8, 9, 10, 11});
  CHECK(res.iterations == 2);
  CHECK(res.residual_norm < 1e-10);
}

TEST_CASE("ghost returns are fitted but explain nothing") {
  std::mt19937_64 rng(37);
  const Eigen::MatrixXcd psi = random_dictionary(30, 24, rng);
  const Eigen::VectorXcd h = block_vector(24, 3, {6}, rng);
  const Eigen::VectorXcd y = psi * h;

  // the second region is a ghost detection: its block is still claimed
  // (detections are trusted), but the joint fit leaves it at zero
  const std::vector<std::vector<int>> regions{{6}, {21}};
  const EstimatorResult res =
      radar_aided_block_omp(y, psi, regions, 3, 1e-8, 6);
  std::vector<int> got = res.support;
  std::sort(got.begin(), got.end());
  CHECK(got == std::vector<int>{6, 7, 8, 21, 22, 23});
  CHECK(res.iterations == 2);
  CHECK(res.residual_norm < 1e-8);
  for (int f = 21; f < 24; ++f) CHECK(std::abs(res.coeffs(f)) < 1e-8);

  // a return whose candidates were all claimed is covered, not re-claimed,
  // and the residual floor still ends the column top-up afterwards
  const std::vector<std::vector<int>> shared{{6}, {6}};
  const EstimatorResult cov =
      radar_aided_block_omp(y, psi, shared, 3, 1e-8, 6);
  CHECK(cov.support == std::vector<int>{6, 7, 8});
  CHECK(cov.iterations == 1);
}

TEST_CASE("the column top-up reaches atoms outside every region") {
  std::mt19937_64 rng(41);
  const Eigen::MatrixXcd psi = random_dictionary(35, 30, rng);
  Eigen::VectorXcd h = block_vector(30, 3, {6}, rng);
  h(17) = cplx(2, 1);  // lone column the radar never saw
  const Eigen::VectorXcd y = psi * h;

  const std::vector<std::vector<int>> regions{{6}};
  const EstimatorResult res = radar_aided_block_omp(y, psi, regions, 3, 1e-8, 5);
  REQUIRE(res.support.size() == 4);
  CHECK(res.support[0] == 6);  // the block comes first, as one claim
  CHECK(res.support[1] == 7);
  CHECK(res.support[2] == 8);
  CHECK(res.support[3] == 17);
  CHECK(res.iterations == 2);
  CHECK(res.residual_norm < 1e-8);
}

TEST_CASE("block claiming with no usable candidates falls back") {
  std::mt19937_64 rng(43);
  const Eigen::MatrixXcd psi = random_dictionary(20, 18, rng);
  const Eigen::VectorXcd h = block_vector(18, 3, {9}, rng);
  const Eigen::VectorXcd y = psi * h;

  for (const auto& regions : {std::vector<std::vector<int>>{},
                              std::vector<std::vector<int>>{{}, {}}}) {
    const EstimatorResult res =
        radar_aided_block_omp(y, psi, regions, 3, 0.0, 3);
    CHECK(res.fallback);
    const EstimatorResult plain = omp(y, psi, 3, 0.0);
    CHECK((res.coeffs - plain.coeffs).norm() == 0.0);
  }
}

TEST_CASE("block region validation rejects bad candidates") {
  std::mt19937_64 rng(47);
  const Eigen::MatrixXcd psi = random_dictionary(10, 12, rng);
  const Eigen::VectorXcd y = Eigen::VectorXcd::Ones(10);
  using Regions = std::vector<std::vector<int>>;
  // misaligned base
  CHECK_THROWS_AS(radar_aided_block_omp(y, psi, Regions{{4}}, 3, 0.0, 3),
                  ConfigError);
  // block reaching past the last column
  CHECK_THROWS_AS(radar_aided_block_omp(y, psi, Regions{{12}}, 3, 0.0, 3),
                  ConfigError);
  CHECK_THROWS_AS(radar_aided_block_omp(y, psi, Regions{{-3}}, 3, 0.0, 3),
                  ConfigError);
  // duplicate candidate within one region
  CHECK_THROWS_AS(radar_aided_block_omp(y, psi, Regions{{6, 6}}, 3, 0.0, 3),
                  ConfigError);
  // nonsense block sizes
  CHECK_THROWS_AS(radar_aided_block_omp(y, psi, Regions{{6}}, 0, 0.0, 3),
                  ConfigError);
  CHECK_THROWS_AS(radar_aided_block_omp(y, psi, Regions{{6}}, 5, 0.0, 3),
                  ConfigError);
}

TEST_CASE("empty seed falls back to plain pursuit") {
  std::mt19937_64 rng(17);
  const Eigen::MatrixXcd psi = random_dictionary(40, 100, rng);
  const Eigen::VectorXcd h = sparse_vector(100, {8, 61}, rng);
  const Eigen::VectorXcd y = psi * h;
  const EstimatorResult res = radar_aided_omp(y, psi, std::vector<int>{}, 1.5, 0.0, 2);
  CHECK(res.fallback);
  std::vector<int> got = res.support;
  std::sort(got.begin(), got.end());
  CHECK(got == std::vector<int>{8, 61});

  const EstimatorResult plain = omp(y, psi, 2, 0.0);
  CHECK((res.coeffs - plain.coeffs).norm() == 0.0);
}

TEST_CASE("seed validation") {
  std::mt19937_64 rng(19);
  const Eigen::MatrixXcd psi = random_dictionary(10, 20, rng);
  const Eigen::VectorXcd y = Eigen::VectorXcd::Ones(10);
  CHECK_THROWS_AS(radar_aided_omp(y, psi, std::vector<int>{3, 3}, 1.0, 0.0, 2), ConfigError);
  CHECK_THROWS_AS(radar_aided_omp(y, psi, std::vector<int>{20}, 1.0, 0.0, 2), ConfigError);
  CHECK_THROWS_AS(radar_aided_omp(y, psi, std::vector<int>{-1}, 1.0, 0.0, 2), ConfigError);
}

TEST_CASE("fixed-support least squares matches the normal equations") {
  std::mt19937_64 rng(23);
  const Eigen::MatrixXcd psi = random_dictionary(30, 60, rng);
  const std::vector<int> support{4, 9, 33, 50};
  Eigen::VectorXcd y(30);
  for (Eigen::Index i = 0; i < 30; ++i) y(i) = complex_gaussian(rng, 1.0);

  const EstimatorResult res = ls_on_support(y, psi, support);
  Eigen::MatrixXcd sub(30, 4);
  for (int j = 0; j < 4; ++j) sub.col(j) = psi.col(support[static_cast<std::size_t>(j)]);
  const Eigen::VectorXcd xs =
      (sub.adjoint() * sub).ldlt().solve(sub.adjoint() * y);
  for (int j = 0; j < 4; ++j)
    CHECK(std::abs(res.coeffs(support[static_cast<std::size_t>(j)]) - xs(j)) < 1e-9);
  CHECK(res.residual_norm ==
        doctest::Approx((y - sub * xs).norm()).epsilon(1e-9));
  // off-support coefficients stay zero
  double off = 0;
  Eigen::VectorXcd masked = res.coeffs;
  for (int idx : support) masked(idx) = 0;
  off = masked.norm();
  CHECK(off == 0.0);
}

TEST_CASE("rank-deficient supports fall back to the minimum-norm solution") {
  Eigen::MatrixXcd psi(6, 4);
  std::mt19937_64 rng(29);
  for (Eigen::Index i = 0; i < 6; ++i) {
    psi(i, 0) = complex_gaussian(rng, 1.0);
    psi(i, 2) = complex_gaussian(rng, 1.0);
    psi(i, 3) = complex_gaussian(rng, 1.0);
  }
  psi.col(1) = psi.col(0);  // exact duplicate -> singular gram matrix
  const Eigen::VectorXcd y = psi.col(0) * cplx(2, 0) + psi.col(2);

  const EstimatorResult res = ls_on_support(y, psi, {0, 1, 2});
  CHECK(res.residual_norm < 1e-10);
  // minimum-norm splits the duplicate pair's coefficient evenly
  CHECK(std::abs(res.coeffs(0) - cplx(1, 0)) < 1e-9);
  CHECK(std::abs(res.coeffs(1) - cplx(1, 0)) < 1e-9);
  CHECK(std::abs(res.coeffs(2) - cplx(1, 0)) < 1e-9);
}

TEST_CASE("error metric normalization") {
  Eigen::VectorXcd truth(2), est(2);
  truth << cplx(3, 0), cplx(0, 4);
  est << cplx(3, 0), cplx(0, 0);
  CHECK(nmse(est, truth) == doctest::Approx(16.0 / 25.0));
  CHECK(nmse(truth, truth) == 0.0);
}

TEST_SUITE_END();
