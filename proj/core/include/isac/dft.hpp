#pragma once

#include <Eigen/Dense>

#include "isac/common.hpp"

namespace isac {

// All transforms in this codebase are explicit matrix products against the
// kernels below. Sizes are small (tens to a few hundred), and writing the
// kernels out keeps every normalization and sign convention in one place
// instead of buried in an FFT library's defaults.

// Unitary forward DFT matrix: F[k, j] = exp(-2*pi*i*k*j / n) / sqrt(n).
// F * x analyzes, F.adjoint() * x synthesizes; both are norm-preserving.
Eigen::MatrixXcd unitary_dft(int n);

// Cached copy of unitary_dft(n). Thread-safe; the reference stays valid for
// the process lifetime (hot paths build the same handful of sizes repeatedly).
const Eigen::MatrixXcd& cached_unitary_dft(int n);

// Unnormalized forward kernel exp(-2*pi*i*k*j / n): the radar range/Doppler
// axes use this (scaling is irrelevant there, detection is ratio-based).
Eigen::MatrixXcd raw_dft(int n);

// Unnormalized conjugate kernel exp(+2*pi*i*k*j / n_out) evaluated for
// j in [0, n_in): an n_in-point sequence zero-padded to n_out bins. The radar
// angle axis uses this so that increasing bin index maps to increasing
// direction cosine.
Eigen::MatrixXcd raw_conj_dft(int n_out, int n_in);

// Index of input bin that lands at output bin k after centering the zero
// frequency: shifted[k] = unshifted[fftshift_src(k, n)].
inline int fftshift_src(int k, int n) { return (k + (n + 1) / 2) % n; }

}  // namespace isac
