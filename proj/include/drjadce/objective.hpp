#pragma once

/** @file
 * Lifted smoothed objective
 *   f(Z) = sum_n w_n J(||S_n||) + (zeta/2) ||A S - V||_F^2,  S = J Jt^H,
 * with J(t) = t - ln(1 + theta t)/theta, together with its Euclidean gradient,
 * Riemannian gradient and Riemannian Hessian-vector product.
 *
 * With G = zeta A^H (A S - V) + W, W_n = w_n c(||S_n||) S_n, c(t) = theta/(1+theta t),
 * the gradient is [G Jt; G^H J] (the factor on the data term is zeta, as the
 * chain rule under the metric Re Tr(xi^H eta) requires).
 */

#include "drjadce/manifold.hpp"

#include <vector>

namespace drjadce {

inline double smooth_norm(double t, double theta) {
  if (t < 0.0) throw contract_error("smooth_norm: t must be non-negative");
  if (!(theta > 0.0)) throw contract_error("smooth_norm: theta must be positive");
  // log1p keeps J(t) ~ theta t^2/2 accurate for small theta t.
  const double x = theta * t;
  if (x < 1e-4) return t * (x / 2.0 - x * x / 3.0 + x * x * x / 4.0);
  return t - std::log1p(x) / theta;
}

inline double smooth_scale(double t, double theta) {
  if (t < 0.0) throw contract_error("smooth_scale: t must be non-negative");
  return theta / (1.0 + theta * t);
}

struct ObjectiveParams {
  CMatrix a;                    // L x N
  CMatrix v;                    // L x r
  std::vector<double> weights;  // N
  double theta = 1.0 / 0.039;
  double zeta = 8.0;

  Index n() const { return a.cols(); }
  Index r() const { return v.cols(); }

  void validate() const {
    if (a.rows() != v.rows()) throw contract_error("ObjectiveParams: A and V row counts differ");
    if (static_cast<Index>(weights.size()) != a.cols()) {
      throw contract_error("ObjectiveParams: one weight per device required");
    }
    if (!(theta > 0.0) || !(zeta > 0.0)) throw contract_error("ObjectiveParams: theta and zeta must be positive");
    for (double w : weights) {
      if (!(w >= 0.0)) throw contract_error("ObjectiveParams: weights must be non-negative");
    }
  }
};

inline CMatrix extract_s(const CMatrix& z, Index n) {
  const Index r = z.cols();
  if (z.rows() != n + r) throw contract_error("extract_s: Z must be (N + r) x r");
  return z.topRows(n) * z.bottomRows(r).adjoint();
}

inline CMatrix extract_s(const ManifoldPoint& p) { return extract_s(p.z(), p.n()); }

/// sum_n w_n J(||S_n||)
inline double smoothed_penalty(const CMatrix& s, const std::vector<double>& w, double theta) {
  double acc = 0.0;
  for (Index i = 0; i < s.rows(); ++i) acc += w[static_cast<std::size_t>(i)] * smooth_norm(s.row(i).norm(), theta);
  return acc;
}

/// sum_n w_n ||S_n||
inline double weighted_l21(const CMatrix& s, const std::vector<double>& w) {
  double acc = 0.0;
  for (Index i = 0; i < s.rows(); ++i) acc += w[static_cast<std::size_t>(i)] * s.row(i).norm();
  return acc;
}

inline double cost_s(const CMatrix& s, const ObjectiveParams& p) {
  return smoothed_penalty(s, p.weights, p.theta) + 0.5 * p.zeta * (p.a * s - p.v).squaredNorm();
}

inline double cost(const CMatrix& z, const ObjectiveParams& p) { return cost_s(extract_s(z, p.n()), p); }
inline double cost(const ManifoldPoint& z, const ObjectiveParams& p) { return cost(z.z(), p); }

/// Gradient of f with respect to S (N x r).
inline CMatrix gradient_s(const CMatrix& s, const ObjectiveParams& p) {
  CMatrix g = p.zeta * (p.a.adjoint() * (p.a * s - p.v));
  for (Index i = 0; i < s.rows(); ++i) {
    const double t = s.row(i).norm();
    g.row(i) += p.weights[static_cast<std::size_t>(i)] * smooth_scale(t, p.theta) * s.row(i);
  }
  return g;
}

inline CMatrix euclidean_gradient(const CMatrix& z, const ObjectiveParams& p) {
  const Index n = p.n(), r = z.cols();
  const CMatrix s = extract_s(z, n);
  const CMatrix g = gradient_s(s, p);
  CMatrix out(n + r, r);
  out.topRows(n) = g * z.bottomRows(r);
  out.bottomRows(r) = g.adjoint() * z.topRows(n);
  return out;
}

inline CMatrix euclidean_gradient(const ManifoldPoint& z, const ObjectiveParams& p) {
  return euclidean_gradient(z.z(), p);
}

inline TangentVector riemannian_gradient(const ManifoldPoint& z, const ObjectiveParams& p) {
  return project_horizontal(z, euclidean_gradient(z, p));
}

/**
 * Projected directional derivative of the gradient field along a horizontal eta:
 * Pi_h( D grad f(Z)[eta] ).
 */
inline TangentVector hessian_vec(const ManifoldPoint& z, const TangentVector& eta, const ObjectiveParams& p,
                                 double horizontal_tol = 1e-8) {
  if (eta.xi.rows() != z.z().rows() || eta.xi.cols() != z.r()) {
    throw contract_error("hessian_vec: shape mismatch");
  }
  if (!is_horizontal(z.z(), eta.xi, horizontal_tol)) {
    throw contract_error("hessian_vec: direction is not horizontal");
  }
  const Index n = p.n(), r = z.r();
  const auto j = z.top();
  const auto jt = z.bottom();
  const auto ej = eta.xi.topRows(n);
  const auto ejt = eta.xi.bottomRows(r);

  const CMatrix s = j * jt.adjoint();
  const CMatrix ds = ej * jt.adjoint() + j * ejt.adjoint();
  const CMatrix g = gradient_s(s, p);

  CMatrix dg = p.zeta * (p.a.adjoint() * (p.a * ds));
  for (Index i = 0; i < n; ++i) {
    const double w = p.weights[static_cast<std::size_t>(i)];
    if (w == 0.0) continue;
    const double t = s.row(i).norm();
    const double c = smooth_scale(t, p.theta);
    dg.row(i) += w * c * ds.row(i);
    if (t > 0.0) {
      // d/ds of c(||s||) = -theta^2/(1+theta t)^2 * Re(s^H ds)/t
      const double denom = 1.0 + p.theta * t;
      const double dt = s.row(i).conjugate().cwiseProduct(ds.row(i)).real().sum() / t;
      dg.row(i) += w * (-p.theta * p.theta / (denom * denom) * dt) * s.row(i);
    }
  }

  CMatrix d(n + r, r);
  d.topRows(n) = dg * jt + g * ejt;
  d.bottomRows(r) = dg.adjoint() * j + g.adjoint() * ej;
  return project_horizontal(z, d);
}

}  // namespace drjadce
