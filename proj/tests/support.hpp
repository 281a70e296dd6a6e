#pragma once

// Shared fixtures for the unit and acceptance tests.

#include "drjadce/drjadce.hpp"

#include <cmath>

namespace drjadce::testing {

inline CMatrix random_matrix(Rng& rng, Index rows, Index cols) { return rng.complex_normal(rows, cols); }

inline CMatrix random_hermitian_pd(Rng& rng, Index n) {
  const CMatrix b = rng.complex_normal(n, n);
  CMatrix g = b * b.adjoint();
  g.diagonal().array() += 0.5;
  return 0.5 * (g + g.adjoint());
}

inline CMatrix random_skew(Rng& rng, Index n) {
  const CMatrix b = rng.complex_normal(n, n);
  return 0.5 * (b - b.adjoint());
}

inline CMatrix random_unitary(Rng& rng, Index n) {
  Eigen::HouseholderQR<CMatrix> qr(rng.complex_normal(n, n));
  return qr.householderQ() * CMatrix::Identity(n, n);
}

inline double rel_err(const CMatrix& a, const CMatrix& b) {
  const double d = (a - b).norm();
  const double s = std::max(a.norm(), b.norm());
  return s > 0.0 ? d / s : d;
}

inline double rel_err(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s > 0.0 ? std::abs(a - b) / s : 0.0;
}

/// Random smooth-objective problem with a full-rank point Z.
struct SmallProblem {
  ObjectiveParams params;
  CMatrix z;
};

inline SmallProblem random_problem(Rng& rng, Index n, Index r, Index l, double theta = 3.0, double zeta = 2.0) {
  SmallProblem sp;
  sp.params.a = rng.complex_normal(l, n);
  for (Index j = 0; j < n; ++j) sp.params.a.col(j).normalize();
  sp.params.v = rng.complex_normal(l, r);
  sp.params.theta = theta;
  sp.params.zeta = zeta;
  for (Index i = 0; i < n; ++i) sp.params.weights.push_back(0.1 + rng.uniform());
  sp.z = rng.complex_normal(n + r, r);
  return sp;
}

}  // namespace drjadce::testing
