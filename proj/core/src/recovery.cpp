#include "isac/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace isac {

namespace {

void check_support(const std::vector<int>& support, Eigen::Index cols,
                   const char* who) {
  std::set<int> seen;
  for (int j : support) {
    if (j < 0 || j >= cols)
      throw ConfigError(std::string(who) + ": support index out of range");
    if (!seen.insert(j).second)
      throw ConfigError(std::string(who) + ": duplicate support index");
  }
}

// Min-norm-leaning LS on the chosen columns; see header for the QR/COD split.
Eigen::VectorXcd solve_ls(const Eigen::MatrixXcd& psi,
                          const std::vector<int>& support,
                          const Eigen::VectorXcd& y) {
  Eigen::MatrixXcd sub(psi.rows(), static_cast<Eigen::Index>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j)
    sub.col(static_cast<Eigen::Index>(j)) = psi.col(support[j]);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(sub);
  const auto& r_diag = qr.matrixR().diagonal();
  const double r_max = std::abs(r_diag(0));
  const double r_min = std::abs(r_diag(r_diag.size() - 1));
  const bool ill = qr.rank() < sub.cols() || r_min == 0.0 ||
                   r_max / r_min > 1e10;
  if (!ill) return qr.solve(y);

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(sub);
  return cod.solve(y);
}

void scatter(EstimatorResult& res, const Eigen::VectorXcd& x,
             Eigen::Index cols) {
  res.coeffs = Eigen::VectorXcd::Zero(cols);
  for (std::size_t j = 0; j < res.support.size(); ++j)
    res.coeffs(res.support[j]) = x(static_cast<Eigen::Index>(j));
}

// One greedy pass: extend res.support until the atom budget or the residual
// floor is hit. res.support may arrive non-empty (the radar seed). A non-null
// allowed mask restricts the search to the flagged columns.
void pursue(EstimatorResult& res, const Eigen::VectorXcd& y,
            const Eigen::MatrixXcd& psi, int max_atoms, double eps,
            const std::vector<char>* allowed = nullptr) {
  const Eigen::Index cols = psi.cols();
  std::vector<char> used(static_cast<std::size_t>(cols), 0);
  for (int j : res.support) used[static_cast<std::size_t>(j)] = 1;

  Eigen::VectorXcd x;
  Eigen::VectorXcd residual = y;
  if (!res.support.empty()) {
    x = solve_ls(psi, res.support, y);
    residual = y - psi(Eigen::all, res.support) * x;
  }
  res.residual_norm = residual.norm();

  while (static_cast<int>(res.support.size()) < max_atoms &&
         static_cast<Eigen::Index>(res.support.size()) < cols &&
         (eps <= 0 || res.residual_norm > eps)) {
    const Eigen::VectorXcd corr = psi.adjoint() * residual;
    int best = -1;
    double best_mag = -1.0;
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      if (allowed && !(*allowed)[static_cast<std::size_t>(j)]) continue;
      const double mag = std::abs(corr(j));
      if (mag > best_mag) {  // strict: ties keep the smaller index
        best_mag = mag;
        best = static_cast<int>(j);
      }
    }
    if (best < 0) break;
    used[static_cast<std::size_t>(best)] = 1;
    res.support.push_back(best);
    ++res.iterations;

    x = solve_ls(psi, res.support, y);
    residual = y - psi(Eigen::all, res.support) * x;
    res.residual_norm = residual.norm();
  }

  if (res.support.empty()) {
    res.coeffs = Eigen::VectorXcd::Zero(cols);
    return;
  }
  if (x.size() == 0) x = solve_ls(psi, res.support, y);
  scatter(res, x, cols);
}

}  // namespace

EstimatorResult omp(const Eigen::VectorXcd& y, const Eigen::MatrixXcd& psi,
                    int max_atoms, double eps) {
  if (psi.rows() != y.size())
    throw ConfigError("omp: observation/dictionary row mismatch");
  if (max_atoms < 1) throw ConfigError("omp: max_atoms must be >= 1");
  EstimatorResult res;
  pursue(res, y, psi, max_atoms, eps);
  return res;
}

EstimatorResult radar_aided_omp(const Eigen::VectorXcd& y,
                                const Eigen::MatrixXcd& psi,
                                const std::vector<int>& seed, double growth,
                                double eps, int min_atoms) {
  if (psi.rows() != y.size())
    throw ConfigError("radar_aided_omp: observation/dictionary row mismatch");
  if (growth < 1.0)
    throw ConfigError("radar_aided_omp: growth must be >= 1");

  if (seed.empty()) {
    EstimatorResult res = omp(y, psi, min_atoms, eps);
    res.fallback = true;
    return res;
  }

  check_support(seed, psi.cols(), "radar_aided_omp");
  EstimatorResult res;
  res.support = seed;
  const int budget = std::max(
      static_cast<int>(std::ceil(growth * static_cast<double>(seed.size()))),
      min_atoms);
  pursue(res, y, psi, budget, eps);
  return res;
}

EstimatorResult radar_aided_block_omp(
    const Eigen::VectorXcd& y, const Eigen::MatrixXcd& psi,
    const std::vector<std::vector<int>>& regions, int block, double eps,
    int min_atoms) {
  if (psi.rows() != y.size())
    throw ConfigError(
        "radar_aided_block_omp: observation/dictionary row mismatch");
  if (block < 1)
    throw ConfigError("radar_aided_block_omp: block must be >= 1");
  const Eigen::Index cols = psi.cols();
  if (cols % block != 0)
    throw ConfigError(
        "radar_aided_block_omp: dictionary width not a multiple of block");

  int detections = 0;
  for (const std::vector<int>& region : regions) {
    std::set<int> seen;
    for (int base : region) {
      if (base < 0 || base + block > cols)
        throw ConfigError("radar_aided_block_omp: block out of range");
      if (base % block != 0)
        throw ConfigError("radar_aided_block_omp: misaligned block base");
      if (!seen.insert(base).second)
        throw ConfigError("radar_aided_block_omp: duplicate candidate block");
    }
    if (!region.empty()) ++detections;
  }
  if (detections == 0) {
    EstimatorResult res = omp(y, psi, min_atoms, eps);
    res.fallback = true;
    return res;
  }
  const int budget = std::max(block * detections, min_atoms);

  // Claim one whole block per detected return: among each return's candidate
  // blocks, greedily take the one explaining the most residual energy, then
  // re-fit jointly. A block never goes to two returns; a return whose
  // candidates were all claimed already is considered covered. Claims are
  // deliberately not gated by the residual floor - the detector already
  // vetted each return, so a block too weak for the observations to confirm
  // is still fitted (its coefficients just stay small).
  EstimatorResult res;
  Eigen::VectorXcd residual = y;
  res.residual_norm = residual.norm();
  std::set<int> claimed;
  std::vector<char> done(regions.size(), 0);
  int open = detections;
  while (open > 0 && static_cast<int>(res.support.size()) + block <= budget) {
    int best_region = -1;
    int best_base = -1;
    double best_gain = -1.0;
    for (std::size_t g = 0; g < regions.size(); ++g) {
      if (done[g] || regions[g].empty()) continue;
      bool viable = false;
      for (int base : regions[g]) {
        if (claimed.count(base)) continue;
        viable = true;
        double gain = 0;
        for (int f = 0; f < block; ++f) {
          const auto col = psi.col(base + f);
          const double den = col.squaredNorm();
          if (den > 0) gain += std::norm(col.dot(residual)) / den;
        }
        if (gain > best_gain) {  // strict: ties keep the earlier candidate
          best_gain = gain;
          best_region = static_cast<int>(g);
          best_base = base;
        }
      }
      if (!viable) {
        done[g] = 1;
        --open;
      }
    }
    if (best_region < 0) break;
    done[static_cast<std::size_t>(best_region)] = 1;
    --open;
    claimed.insert(best_base);
    for (int f = 0; f < block; ++f) res.support.push_back(best_base + f);
    ++res.iterations;

    const Eigen::VectorXcd x = solve_ls(psi, res.support, y);
    residual = y - psi(Eigen::all, res.support) * x;
    res.residual_norm = residual.norm();
  }

  // Whatever the claimed blocks cannot explain is left to the ordinary
  // column-wise search over the full dictionary.
  pursue(res, y, psi, budget, eps);
  return res;
}

EstimatorResult ls_on_support(const Eigen::VectorXcd& y,
                              const Eigen::MatrixXcd& psi,
                              const std::vector<int>& support) {
  if (psi.rows() != y.size())
    throw ConfigError("ls_on_support: observation/dictionary row mismatch");
  if (support.empty())
    throw ConfigError("ls_on_support: empty support");
  check_support(support, psi.cols(), "ls_on_support");

  EstimatorResult res;
  res.support = support;
  const Eigen::VectorXcd x = solve_ls(psi, support, y);
  res.residual_norm = (y - psi(Eigen::all, support) * x).norm();
  scatter(res, x, psi.cols());
  return res;
}

double nmse(const Eigen::VectorXcd& est, const Eigen::VectorXcd& truth) {
  if (est.size() != truth.size())
    throw ConfigError("nmse: length mismatch");
  const double denom = truth.squaredNorm();
  if (denom == 0) throw ConfigError("nmse: zero reference");
  return (est - truth).squaredNorm() / denom;
}

}  // namespace isac
