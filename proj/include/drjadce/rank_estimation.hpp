#pragma once

/** @file
 * Rank of the device state matrix from the received block.
 *
 * The sample covariance is shrunk toward the identity,
 *   C = (1 - beta) Y Y^H / M + beta I,
 * and the rank is the maximizer over r in {1, ..., L-1} of the penalized
 * profile log-likelihood
 *   CM(r) = -(L-r) ln(mean of trailing L-r eigenvalues)
 *           - sum_{i<=r} ln lambda_i - (u r / M)(L - (r-1)/2).
 *
 * The covariance estimator is only meaningful when Y is expressed in units
 * where the per-entry noise variance is O(1); callers normalize first.
 */

#include "drjadce/linalg.hpp"

#include <cmath>
#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

namespace drjadce {

struct RankSelection {
  Index r_hat = 0;
  std::vector<double> cm_values;  // cm_values[r-1] = CM(r), r = 1..L-1
  RVector eigenvalues;            // descending, length L
  CMatrix eigenvectors;           // L x L, columns match eigenvalues
  double beta = 0.0;
  double u = 0.0;
  double sigma2_hat = 0.0;

  /// Columns r+1..L of the eigenvector matrix.
  CMatrix noise_subspace(Index r) const {
    const Index l = eigenvectors.cols();
    if (r < 0 || r > l) throw contract_error("noise_subspace: rank out of range");
    return eigenvectors.rightCols(l - r);
  }
};

inline CMatrix regularized_covariance(const CMatrix& y, double beta) {
  // beta = 0 (plain sample covariance) is accepted for diagnostics.
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw contract_error("regularized_covariance: beta must lie in [0, 1]");
  }
  const double m = static_cast<double>(y.cols());
  CMatrix c = (1.0 - beta) / m * (y * y.adjoint());
  c.diagonal().array() += beta;
  return 0.5 * (c + c.adjoint());
}

/// Penalty constant u = 0.6 + 1.2 sqrt(M/L) - 1.2 (M/L) ln(1 + sqrt(L/M)).
inline double default_u(Index m, Index l) {
  if (m < 1 || l < 1) throw contract_error("default_u: M and L must be positive");
  const double ratio = static_cast<double>(m) / static_cast<double>(l);
  return 0.6 + 1.2 * std::sqrt(ratio) - 1.2 * ratio * std::log1p(std::sqrt(1.0 / ratio));
}

/**
 * Shrinkage weight from the spectrum heuristic
 * beta = min(1, (L/M) * sum(lambda^2) / (sum lambda)^2).
 * Kept for comparison; on noise-normalized data it is O(1/M) and leaves the
 * Marchenko-Pastur bulk edge above the CM penalty, so CM over-selects.
 */
inline double spectral_ratio_beta(const RVector& sample_eigenvalues, Index m) {
  const double l = static_cast<double>(sample_eigenvalues.size());
  const double s1 = sample_eigenvalues.sum();
  if (!(s1 > 0.0)) return 1.0;
  const double s2 = sample_eigenvalues.squaredNorm();
  return std::min(1.0, l / static_cast<double>(m) * s2 / (s1 * s1));
}

/**
 * Edge-calibrated shrinkage for unit-noise data. A pure-noise sample
 * eigenvalue at the bulk edge (1 + sqrt(L/M))^2 is shrunk to x* where its
 * likelihood gain x* - 1 - ln x* equals the CM penalty increment
 * u (L - r_ref) / M at r_ref = L/4. Components weaker than the bulk edge are
 * not separable from noise by any eigenvalue rule.
 */
inline double default_beta(Index l, Index m, double u) {
  if (l < 1 || m < 1) throw contract_error("default_beta: L and M must be positive");
  const double ld = static_cast<double>(l);
  const double edge = std::pow(1.0 + std::sqrt(ld / static_cast<double>(m)), 2);
  const double target = u * (ld - ld / 4.0) / static_cast<double>(m);
  if (!(target > 0.0)) return 1.0;
  // Solve x - 1 - ln x = target for x > 1 by bisection (g is increasing there).
  double lo = 1.0, hi = 2.0;
  while (hi - 1.0 - std::log(hi) < target) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mid - 1.0 - std::log(mid) < target ? lo : hi) = mid;
  }
  const double x = 0.5 * (lo + hi);
  return std::clamp(1.0 - (x - 1.0) / (edge - 1.0), 0.0, 1.0);
}

inline double cm_criterion(const RVector& lambda, Index r, double u, Index m) {
  const Index l = lambda.size();
  if (r < 1 || r > l - 1) throw std::out_of_range("cm_criterion: r must lie in [1, L-1]");
  if (m < 1) throw contract_error("cm_criterion: M must be positive");
  double tail = 0.0;
  for (Index i = r; i < l; ++i) tail += lambda(i);
  double head = 0.0;
  for (Index i = 0; i < r; ++i) head += std::log(lambda(i));
  const double lr = static_cast<double>(l - r);
  const double rd = static_cast<double>(r);
  return -lr * std::log(tail / lr) - head -
         u * rd / static_cast<double>(m) * (static_cast<double>(l) - (rd - 1.0) / 2.0);
}

/// Scans CM(r) for r = 1..L-1; ties (to round-off) resolve to the smaller r.
inline RankSelection estimate_rank(const CMatrix& y, double beta, double u) {
  const Index l = y.rows();
  if (l < 2) throw contract_error("estimate_rank: need L >= 2");
  const CMatrix c = regularized_covariance(y, beta);
  HermitianEigenSystem es = hermitian_eig(c);
  RankSelection sel;
  sel.beta = beta;
  sel.u = u;
  sel.eigenvalues = es.eigenvalues;
  sel.eigenvectors = std::move(es.eigenvectors);
  // Round-off can push zero-mode eigenvalues of a beta = 0 covariance slightly negative.
  const double floor = std::numeric_limits<double>::min();
  RVector lam = sel.eigenvalues.cwiseMax(floor);
  double best = -std::numeric_limits<double>::infinity();
  for (Index r = 1; r <= l - 1; ++r) {
    const double v = cm_criterion(lam, r, u, y.cols());
    sel.cm_values.push_back(v);
    if (r == 1 || v > best + 1e-12 * std::abs(best)) {
      best = v;
      sel.r_hat = r;
    }
  }
  sel.sigma2_hat = sel.eigenvalues.tail(l - sel.r_hat).mean();
  return sel;
}

/// estimate_rank with default_u(M, L) and default_beta(L, M, u).
inline RankSelection estimate_rank(const CMatrix& y) {
  const double u = default_u(y.cols(), y.rows());
  return estimate_rank(y, default_beta(y.rows(), y.cols(), u), u);
}

struct RankOptions {
  std::optional<double> beta;  // default_beta when unset
  std::optional<double> u;     // default_u when unset
};

/**
 * Rank estimate used ahead of dimension reduction. When L > M the L x L
 * covariance has L - M structurally zero modes that dominate CM, so the
 * criterion runs on the M x M Gram of Y^H (same nonzero spectrum, roles of L
 * and M swapped). The returned selection always carries the L x L eigen-system
 * whose trailing eigenvectors span the noise subspace.
 */
inline RankSelection estimate_rank_for_reduction(const CMatrix& y, const RankOptions& opt = {}) {
  const Index l = y.rows(), m = y.cols();
  const double u = opt.u.value_or(default_u(m, l));
  const double beta = opt.beta.value_or(default_beta(l, m, u));
  RankSelection sel = estimate_rank(y, beta, u);
  if (l > m && m >= 2) {
    const double ud = opt.u.value_or(default_u(l, m));
    const double bd = opt.beta.value_or(default_beta(m, l, ud));
    const CMatrix yh = y.adjoint();
    const RankSelection dual = estimate_rank(yh, bd, ud);
    sel.r_hat = dual.r_hat;
    sel.cm_values = dual.cm_values;
    sel.sigma2_hat = sel.eigenvalues.tail(l - sel.r_hat).mean();
  }
  return sel;
}

}  // namespace drjadce
