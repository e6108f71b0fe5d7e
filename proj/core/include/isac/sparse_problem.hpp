#pragma once

#include <Eigen/Dense>
#include <vector>

#include "isac/dd_channel.hpp"
#include "isac/otfs.hpp"

namespace isac {

// ---------------------------------------------------------------------------
// Linear observation model for pilot-based channel estimation.
//
// The pilot-region observations are linear in the vectorized channel:
//   y = Psi * h + v,
// with h the DD channel tensor stacked by DdChannel::cell_index and Psi one
// column per (delay tap, Doppler column, antenna) cell. Two constructions of
// Psi live here:
//
//   * a closed-form product Psi = Z .* P, where Z carries the Doppler phase
//     accumulated over the circular delay shift and P samples the transmit
//     grid at the shifted position;
//   * an oracle built by probing the composed modulate -> channel ->
//     demodulate -> extract chain with unit-coefficient single-cell channels.
//
// The oracle is exact by construction (the chain is linear in h) and is what
// estimation uses. The closed form is kept as an audit target: audit_dictionary
// measures how far it is from the truth, and the simulation harness refuses to
// substitute it for the oracle unless the deviation is at floating-point
// level. See the psi-check subcommand of the CLI.
// ---------------------------------------------------------------------------

struct SparseProblem {
  Eigen::VectorXcd y;      // pilot-region observations
  Eigen::MatrixXcd psi;    // observations x (delay_taps * N * A), angle domain
  double noise_var = 0.0;  // per-observation noise variance
};

// Doppler-phase factor matrix: entry at observation row (m, k) and dictionary
// column (m', k', a) is z^(n * ((m - m') mod M)) with n = k - N/2 the observed
// Doppler tap. Independent of a; columns repeat across the antenna axis.
Eigen::MatrixXcd closed_form_phase_matrix(const FrameLayout& layout,
                                          const CommConfig& cfg);

// Pilot-sample matrix: same indexing, entry x_a[(m - m') mod M, (k - k') mod N]
// drawn from antenna a's full transmit grid.
Eigen::MatrixXcd closed_form_pilot_matrix(const std::vector<DdGrid>& frame,
                                          const FrameLayout& layout,
                                          const CommConfig& cfg);

// Elementwise product of the two factors above.
Eigen::MatrixXcd closed_form_dictionary(const std::vector<DdGrid>& frame,
                                        const FrameLayout& layout,
                                        const CommConfig& cfg);

// Exact dictionary: column t is extract_observations(demodulate(channel(s)))
// for a unit channel coefficient in cell t. `threads` > 1 splits the probe
// columns across worker threads (the result does not depend on it).
Eigen::MatrixXcd probe_dictionary(const std::vector<DdGrid>& frame,
                                  const FrameLayout& layout,
                                  const CommConfig& cfg, int threads = 1);

// Re-express a dictionary against the angle-domain channel: psi_tilde such
// that psi_tilde * to_angle_domain(h) == psi * h for all h.
Eigen::MatrixXcd dictionary_to_angle(const Eigen::MatrixXcd& psi, int antennas);

struct DictionaryAudit {
  double max_abs_dev = 0.0;   // max |closed - oracle| over all entries
  double rel_frobenius = 0.0; // ||closed - oracle||_F / ||oracle||_F
};

DictionaryAudit audit_dictionary(const Eigen::MatrixXcd& closed,
                                 const Eigen::MatrixXcd& oracle);

}  // namespace isac
