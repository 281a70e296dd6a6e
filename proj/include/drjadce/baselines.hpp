#pragma once

/** @file
 * Reference recovery methods: (weighted) l21-regularized least squares by
 * monotone FISTA, simultaneous OMP, and the support-aware linear MMSE.
 */

#include "drjadce/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace drjadce {

struct BaselineConfig {
  double zeta = 8.0;
  int max_iters = 20000;
  double tol = 1e-10;  // relative objective change
  std::optional<std::vector<double>> weights;  // unit weights when unset
};

struct L21Result {
  CMatrix x;
  double objective = 0.0;
  double prox_residual = 0.0;
  int iters = 0;
  bool converged = false;
};

inline double l21_objective(const CMatrix& a, const CMatrix& y, const CMatrix& x, double zeta,
                            const std::vector<double>& w) {
  double pen = 0.0;
  for (Index i = 0; i < x.rows(); ++i) pen += w[static_cast<std::size_t>(i)] * x.row(i).norm();
  return pen + 0.5 * zeta * (a * x - y).squaredNorm();
}

/// Row-wise soft threshold: row i shrinks by tau_i in l2 norm.
inline CMatrix row_soft_threshold(const CMatrix& x, const std::vector<double>& tau) {
  CMatrix out = x;
  for (Index i = 0; i < x.rows(); ++i) {
    const double nrm = x.row(i).norm();
    const double t = tau[static_cast<std::size_t>(i)];
    if (nrm <= t) {
      out.row(i).setZero();
    } else {
      out.row(i) *= (1.0 - t / nrm);
    }
  }
  return out;
}

/**
 * min_X sum_n w_n ||X_n|| + (zeta/2) ||A X - Y||_F^2 by monotone FISTA with
 * step 1/(zeta sigma_max(A)^2). Stops when the relative objective change is
 * below tol and the prox-gradient residual is below 1e-6 (1 + ||X||_F).
 */
inline L21Result l21_solve(const CMatrix& a, const CMatrix& y, const BaselineConfig& cfg = {}) {
  if (a.rows() != y.rows()) throw contract_error("l21_solve: A and Y row counts differ");
  if (!(cfg.zeta > 0.0)) throw contract_error("l21_solve: zeta must be positive");
  const Index n = a.cols(), c = y.cols();
  const std::vector<double> w = cfg.weights.value_or(std::vector<double>(static_cast<std::size_t>(n), 1.0));
  if (static_cast<Index>(w.size()) != n) throw contract_error("l21_solve: one weight per row required");

  L21Result out;
  out.x = CMatrix::Zero(n, c);
  const double smax = a.size() ? thin_svd(a).singulars(0) : 0.0;
  const double lip = cfg.zeta * smax * smax;
  if (!(lip > 0.0)) {
    out.converged = true;
    return out;
  }
  std::vector<double> tau(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) tau[i] = w[i] / lip;
  const CMatrix ahy = a.adjoint() * y;
  const CMatrix aha = a.adjoint() * a;
  auto prox_step = [&](const CMatrix& x) {
    return row_soft_threshold(x - (cfg.zeta / lip) * (aha * x - ahy), tau);
  };

  CMatrix x = out.x, x_prev = out.x, yk = out.x;
  double f = l21_objective(a, y, x, cfg.zeta, w);
  double t = 1.0;
  for (int k = 0; k < cfg.max_iters; ++k) {
    const CMatrix zk = prox_step(yk);
    const double fz = l21_objective(a, y, zk, cfg.zeta, w);
    x_prev = x;
    const double f_prev = f;
    if (fz <= f) {
      x = zk;
      f = fz;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    yk = x + (t / t_next) * (zk - x) + ((t - 1.0) / t_next) * (x - x_prev);
    t = t_next;
    out.iters = k + 1;
    if (std::abs(f_prev - f) <= cfg.tol * std::max(1.0, std::abs(f))) {
      const double res = (x - prox_step(x)).norm();
      if (res < 1e-6 * (1.0 + x.norm())) {
        out.converged = true;
        break;
      }
      // Stagnated momentum: restart from the best point.
      yk = x;
      t = 1.0;
    }
  }
  out.x = x;
  out.objective = f;
  out.prox_residual = (x - prox_step(x)).norm();
  return out;
}

struct SompResult {
  std::vector<Index> support;  // in selection order
  CMatrix x;
};

/**
 * Greedy MMV recovery: k rounds of picking the atom with the largest
 * ||a_n^H R||, then refitting by least squares on the support. Ties go to the
 * lowest index. With residual_tol set, stops early once ||R||_F <= residual_tol.
 */
inline SompResult somp(const CMatrix& a, const CMatrix& y, Index k, std::optional<double> residual_tol = {}) {
  if (a.rows() != y.rows()) throw contract_error("somp: A and Y row counts differ");
  if (k < 0 || k > a.rows()) throw contract_error("somp: sparsity must lie in [0, L]");
  const Index n = a.cols();
  SompResult out;
  out.x = CMatrix::Zero(n, y.cols());
  CMatrix resid = y;
  CMatrix coef;
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (Index it = 0; it < k; ++it) {
    if (residual_tol && resid.norm() <= *residual_tol) break;
    const CMatrix corr = a.adjoint() * resid;
    Index best = -1;
    double best_v = -1.0;
    for (Index i = 0; i < n; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      const double v = corr.row(i).norm();
      if (v > best_v) {
        best_v = v;
        best = i;
      }
    }
    if (best < 0) break;
    used[static_cast<std::size_t>(best)] = true;
    out.support.push_back(best);
    CMatrix as(a.rows(), static_cast<Index>(out.support.size()));
    for (std::size_t j = 0; j < out.support.size(); ++j) as.col(static_cast<Index>(j)) = a.col(out.support[j]);
    coef = as.completeOrthogonalDecomposition().solve(y);
    resid = y - as * coef;
  }
  for (std::size_t j = 0; j < out.support.size(); ++j) out.x.row(out.support[j]) = coef.row(static_cast<Index>(j));
  return out;
}

/**
 * Linear MMSE on the known support K with prior variance gamma per entry:
 * X_K = (A_K^H A_K + (sigma2/gamma) I)^{-1} A_K^H Y, zero elsewhere. Falls
 * back to the pseudo-inverse when the regularized Gram is singular.
 */
inline CMatrix oracle_mmse(const CMatrix& a, const CMatrix& y, const std::vector<Index>& support, double sigma2,
                           double gamma) {
  if (a.rows() != y.rows()) throw contract_error("oracle_mmse: A and Y row counts differ");
  if (sigma2 < 0.0 || !(gamma > 0.0)) throw contract_error("oracle_mmse: need sigma2 >= 0 and gamma > 0");
  CMatrix x = CMatrix::Zero(a.cols(), y.cols());
  if (support.empty()) return x;
  const Index k = static_cast<Index>(support.size());
  CMatrix ak(a.rows(), k);
  for (Index j = 0; j < k; ++j) {
    const Index idx = support[static_cast<std::size_t>(j)];
    if (idx < 0 || idx >= a.cols()) throw contract_error("oracle_mmse: support index out of range");
    ak.col(j) = a.col(idx);
  }
  CMatrix gram = ak.adjoint() * ak;
  gram.diagonal().array() += sigma2 / gamma;
  const Eigen::LDLT<CMatrix> ldlt(gram);
  CMatrix xk;
  const double dmin = ldlt.vectorD().real().minCoeff();
  const double dmax = ldlt.vectorD().real().maxCoeff();
  if (ldlt.info() == Eigen::Success && dmin > 1e-12 * std::max(dmax, 1e-300)) {
    xk = ldlt.solve(ak.adjoint() * y);
  } else {
    xk = ak.completeOrthogonalDecomposition().pseudoInverse() * y;
  }
  for (Index j = 0; j < k; ++j) x.row(support[static_cast<std::size_t>(j)]) = xk.row(j);
  return x;
}

}  // namespace drjadce
