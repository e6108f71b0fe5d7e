#pragma once

#include <Eigen/Dense>
#include <vector>

#include "isac/common.hpp"

namespace isac {

// ---------------------------------------------------------------------------
// Sparse channel estimators over y = Psi * h + v.
//
// The estimators share one LS core:
//   * omp: classic greedy pursuit from an empty support;
//   * radar_aided_omp: seeds the support with radar-derived cells, fits them
//     first, then keeps pursuing missed atoms up to a budget proportional to
//     the seed size (an empty seed falls back to plain omp);
//   * radar_aided_block_omp: claims one whole column block per detected
//     return, choosing among that return's candidate blocks by explained
//     energy, then tops up column-wise;
//   * ls_on_support: plain LS on a fixed support (genie bound / final refit).
//
// The LS core is a column-pivoted QR; if the selected columns are close to
// rank deficient (condition estimate above 1e10) it switches to a complete
// orthogonal decomposition, i.e. the minimum-norm solution.
// ---------------------------------------------------------------------------

struct EstimatorResult {
  Eigen::VectorXcd coeffs;    // full dictionary-length vector, zero off-support
  std::vector<int> support;   // selected columns in selection order
  int iterations = 0;         // greedy atoms added (seed atoms not counted)
  double residual_norm = 0;
  bool fallback = false;      // radar_aided_omp ran without a usable seed
};

// Residual threshold at the noise floor: E||v|| for white noise of the given
// per-observation variance.
inline double noise_floor_eps(double noise_var, int observations) {
  return std::sqrt(noise_var * observations);
}

// Greedy pursuit: up to max_atoms columns, stopping early once the residual
// norm drops to eps (eps <= 0 disables the early stop). Correlation ties go
// to the smallest column index; a column is never picked twice.
EstimatorResult omp(const Eigen::VectorXcd& y, const Eigen::MatrixXcd& psi,
                    int max_atoms, double eps);

// Radar-seeded variant. seed indices must be unique and in range; the atom
// budget is ceil(growth * seed size), floored at min_atoms so a sparse seed
// extends the blind budget instead of capping the search below it. With an
// empty seed, runs omp(y, psi, min_atoms, eps) and flags the result.
EstimatorResult radar_aided_omp(const Eigen::VectorXcd& y,
                                const Eigen::MatrixXcd& psi,
                                const std::vector<int>& seed, double growth,
                                double eps, int min_atoms);

// Block variant for dictionaries whose columns come in fixed-size contiguous
// blocks (here: one cell's response across every beam, with the beam index
// fastest). Each region lists the candidate block bases for one detected
// return - the mapped cell plus its neighbors within the localization
// uncertainty. One block is claimed per return, greedily by the energy the
// whole block explains of the current residual, with a joint re-fit after
// every claim; a block never goes to two returns, and a return whose
// candidates were all claimed is considered covered. Every detected return
// is claimed within the budget - the detector already vetted it, so claims
// are not gated by the residual floor. The remaining budget,
// max(block * detections, min_atoms) in total, is then spent column-wise
// over the full dictionary exactly like omp, where the eps stop applies.
// iterations counts block claims plus top-up picks. Bases must be
// aligned to the block size, in range, and unique within a region; sharing
// across regions is allowed. Empty regions are ignored; with no candidates
// at all, falls back to omp(y, psi, min_atoms, eps) and flags the result.
EstimatorResult radar_aided_block_omp(const Eigen::VectorXcd& y,
                                      const Eigen::MatrixXcd& psi,
                                      const std::vector<std::vector<int>>& regions,
                                      int block, double eps, int min_atoms);

// LS coefficients on a fixed support (no pursuit).
EstimatorResult ls_on_support(const Eigen::VectorXcd& y,
                              const Eigen::MatrixXcd& psi,
                              const std::vector<int>& support);

// ||est - truth||^2 / ||truth||^2.
double nmse(const Eigen::VectorXcd& est, const Eigen::VectorXcd& truth);

}  // namespace isac
