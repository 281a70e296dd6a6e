#pragma once

/** @file
 * Quotient geometry of full-column-rank Z in C^{(N+r) x r} modulo Z ~ Z Q,
 * Q unitary. Tangent vectors are represented by their horizontal lifts,
 * i.e. directions xi with xi^H Z = Z^H xi. The metric is Re Tr(xi^H eta).
 */

#include "drjadce/linalg.hpp"

namespace drjadce {

/// Thrown when Z + eta loses full column rank.
class retraction_error : public rank_deficiency_error {
 public:
  using rank_deficiency_error::rank_deficiency_error;
};

inline constexpr double kRankRatioTol = 1e-10;

/// sigma_min / sigma_max of a tall matrix; 0 for a zero matrix.
inline double column_rank_ratio(const CMatrix& z) {
  const RVector s = thin_svd(z).singulars;
  if (s.size() == 0 || !(s(0) > 0.0)) return 0.0;
  return s(s.size() - 1) / s(0);
}

/**
 * A point on the total space: Z = [J; Jt] with J the N x r top block and Jt the
 * r x r bottom block. The constructor enforces full column rank.
 */
class ManifoldPoint {
 public:
  ManifoldPoint(CMatrix z, Index n) : z_(std::move(z)), n_(n) {
    if (n_ < 0 || z_.rows() != n_ + z_.cols() || z_.cols() < 1) {
      throw contract_error("ManifoldPoint: Z must be (N + r) x r with r >= 1");
    }
    require_finite(z_, "ManifoldPoint");
    if (!(column_rank_ratio(z_) > kRankRatioTol)) {
      throw rank_deficiency_error("ManifoldPoint: Z is not of full column rank");
    }
  }

  const CMatrix& z() const { return z_; }
  Index n() const { return n_; }
  Index r() const { return z_.cols(); }
  auto top() const { return z_.topRows(n_); }
  auto bottom() const { return z_.bottomRows(z_.cols()); }

 private:
  CMatrix z_;
  Index n_;
};

/// Horizontal tangent vector at some point; the point is passed explicitly to every operation.
struct TangentVector {
  CMatrix xi;
};

inline double metric(const CMatrix& xi, const CMatrix& eta) {
  if (xi.rows() != eta.rows() || xi.cols() != eta.cols()) {
    throw contract_error("metric: shape mismatch");
  }
  return xi.cwiseProduct(eta.conjugate()).real().sum();
}

inline double metric(const TangentVector& a, const TangentVector& b) { return metric(a.xi, b.xi); }

inline double tangent_norm(const CMatrix& xi) { return xi.norm(); }

inline bool is_horizontal(const CMatrix& z, const CMatrix& xi, double tol = 1e-8) {
  const CMatrix d = xi.adjoint() * z - z.adjoint() * xi;
  return d.norm() <= tol * (1.0 + xi.norm() * z.norm());
}

struct HorizontalSplit {
  CMatrix horizontal;
  CMatrix b;  // skew-Hermitian, vertical part is Z B
};

/// xi_bar = horizontal + Z B with Z^H Z B + B Z^H Z = Z^H xi_bar - xi_bar^H Z.
inline HorizontalSplit split_horizontal(const CMatrix& z, const CMatrix& xi_bar) {
  if (xi_bar.rows() != z.rows() || xi_bar.cols() != z.cols()) {
    throw contract_error("project_horizontal: shape mismatch");
  }
  const CMatrix g = z.adjoint() * z;
  const CMatrix zx = z.adjoint() * xi_bar;
  CMatrix rhs = zx - zx.adjoint();
  HorizontalSplit out;
  out.b = solve_sylvester_skew(g, rhs);
  out.horizontal = xi_bar - z * out.b;
  return out;
}

inline TangentVector project_horizontal(const CMatrix& z, const CMatrix& xi_bar) {
  return {split_horizontal(z, xi_bar).horizontal};
}

inline TangentVector project_horizontal(const ManifoldPoint& p, const CMatrix& xi_bar) {
  return project_horizontal(p.z(), xi_bar);
}

/// Z + alpha eta; throws retraction_error if the result is rank deficient.
inline ManifoldPoint retract(const ManifoldPoint& p, const TangentVector& eta, double alpha = 1.0) {
  if (eta.xi.rows() != p.z().rows() || eta.xi.cols() != p.z().cols()) {
    throw contract_error("retract: shape mismatch");
  }
  CMatrix z = p.z() + alpha * eta.xi;
  require_finite(z, "retract");
  if (!(column_rank_ratio(z) > kRankRatioTol)) {
    throw retraction_error("retract: step leaves the full-rank manifold");
  }
  return ManifoldPoint(std::move(z), p.n());
}

}  // namespace drjadce
