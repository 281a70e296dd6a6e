#pragma once

/** @file
 * Projection of the received block onto its leading r-dimensional signal
 * subspace. With Y = P diag(s) Q^H, V = P_r diag(s_r) and U = Q^H_r, so V U is
 * the best rank-r approximation of Y and U U^H = I. A row-sparse S with
 * A S ~ V lifts back to X = S U with identical row norms.
 */

#include "drjadce/linalg.hpp"

#include <iostream>
#include <vector>

namespace drjadce {

struct ReducedModel {
  CMatrix v;        // L x r
  CMatrix u;        // r x M, orthonormal rows
  std::vector<double> weights;  // per-device noise-subspace weights
  CMatrix d_noise;  // L x (L - r)
  Index r = 0;
  RVector singulars;  // all singular values of Y, for diagnostics
};

struct Reduction {
  CMatrix v;
  CMatrix u;
  RVector singulars;
  /// Number of requested directions backed by a zero singular value.
  Index zero_directions = 0;
};

/**
 * Truncated SVD split of Y. Requesting more directions than Y has nonzero
 * singular values is allowed: the surplus columns of V are zero and
 * zero_directions reports how many.
 */
inline Reduction reduce(const CMatrix& y, Index r) {
  if (r < 1 || r > std::min(y.rows(), y.cols())) {
    throw contract_error("reduce: r must lie in [1, min(L, M)]");
  }
  const ThinSVD svd = thin_svd(y);
  Reduction out;
  out.singulars = svd.singulars;
  out.v = svd.left.leftCols(r) * svd.singulars.head(r).asDiagonal();
  out.u = svd.rightH.topRows(r);
  const double tol = svd.singulars.size() ? 1e-12 * svd.singulars(0) : 0.0;
  for (Index i = 0; i < r; ++i) {
    if (!(svd.singulars(i) > tol)) {
      out.v.col(i).setZero();
      ++out.zero_directions;
    }
  }
  return out;
}

/// w_n = || row n of A^H D_noise ||_2.
inline std::vector<double> compute_weights(const CMatrix& a, const CMatrix& d_noise) {
  if (d_noise.rows() != a.rows()) throw contract_error("compute_weights: shape mismatch");
  std::vector<double> w(static_cast<std::size_t>(a.cols()), 0.0);
  if (d_noise.cols() == 0) return w;
  const CMatrix proj = a.adjoint() * d_noise;
  for (Index n = 0; n < a.cols(); ++n) w[static_cast<std::size_t>(n)] = proj.row(n).norm();
  return w;
}

inline CMatrix lift_back(const CMatrix& s_hat, const CMatrix& u) {
  if (s_hat.cols() != u.rows()) throw contract_error("lift_back: shape mismatch");
  return s_hat * u;
}

/// reduce + weights from the given noise-subspace basis.
inline ReducedModel build_reduced_model(const CMatrix& y, const CMatrix& a, Index r, const CMatrix& d_noise) {
  Reduction red = reduce(y, r);
  if (red.zero_directions > 0) {
    std::cerr << "warning: reduce: " << red.zero_directions
              << " requested direction(s) have zero singular value\n";
  }
  ReducedModel model;
  model.v = std::move(red.v);
  model.u = std::move(red.u);
  model.singulars = std::move(red.singulars);
  model.r = r;
  model.d_noise = d_noise;
  model.weights = compute_weights(a, d_noise);
  return model;
}

}  // namespace drjadce
