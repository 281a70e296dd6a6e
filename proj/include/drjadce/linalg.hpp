#pragma once

/** @file
 * Dense complex linear-algebra kernels: Hermitian eigen-decomposition,
 * thin SVD and the skew-Hermitian Sylvester solve used by the horizontal
 * projection. Eigen provides the factorizations; this header fixes the
 * ordering and tolerance contracts the rest of the library relies on.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace drjadce {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Thrown when an input violates a documented precondition.
class contract_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a Gram matrix or iterate loses full column rank.
class rank_deficiency_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a computation produces NaN/Inf.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline bool all_finite(const CMatrix& m) {
  return m.allFinite();
}

inline void require_finite(const CMatrix& m, const char* what) {
  if (!m.allFinite()) {
    throw numerical_error(std::string(what) + ": non-finite entries");
  }
}

/// Frobenius-norm distance of C from its conjugate transpose.
inline double hermitian_defect(const CMatrix& c) {
  return (c - c.adjoint()).norm();
}

struct HermitianEigenSystem {
  RVector eigenvalues;   // descending
  CMatrix eigenvectors;  // column i pairs with eigenvalues(i)
};

/**
 * Eigen-decomposition of a Hermitian matrix with eigenvalues sorted in
 * descending order. Rejects inputs whose anti-Hermitian part exceeds
 * 1e-10 * ||C||_F.
 */
inline HermitianEigenSystem hermitian_eig(const CMatrix& c) {
  if (c.rows() != c.cols()) {
    throw contract_error("hermitian_eig: matrix is not square");
  }
  require_finite(c, "hermitian_eig");
  const double scale = c.norm();
  if (hermitian_defect(c) > 1e-10 * std::max(scale, 1e-300)) {
    throw contract_error("hermitian_eig: matrix is not Hermitian");
  }
  const Index n = c.rows();
  HermitianEigenSystem out;
  if (n == 0) return out;
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(c);
  if (solver.info() != Eigen::Success) {
    throw numerical_error("hermitian_eig: eigen solver failed");
  }
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

struct ThinSVD {
  CMatrix left;      // rows x k, orthonormal columns
  RVector singulars; // k = min(rows, cols), descending
  CMatrix rightH;    // k x cols, orthonormal rows
};

inline ThinSVD thin_svd(const CMatrix& y) {
  require_finite(y, "thin_svd");
  ThinSVD out;
  const Index k = std::min(y.rows(), y.cols());
  if (k == 0) {
    out.left = CMatrix(y.rows(), 0);
    out.rightH = CMatrix(0, y.cols());
    return out;
  }
  Eigen::BDCSVD<CMatrix> svd(y, Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.left = svd.matrixU();
  out.singulars = svd.singularValues();
  out.rightH = svd.matrixV().adjoint();
  return out;
}

/// Count of singular values above rel_tol * sigma_max.
inline Index numerical_rank(const CMatrix& m, double rel_tol = 1e-8) {
  if (m.size() == 0) return 0;
  const RVector s = thin_svd(m).singulars;
  if (s.size() == 0 || s(0) == 0.0) return 0;
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * s(0)) ++r;
  }
  return r;
}

/**
 * Solves G B + B G = R for B, where G is Hermitian positive definite and R is
 * skew-Hermitian. Diagonalizes G = Q diag(lambda) Q^H and divides the rotated
 * right-hand side entrywise by lambda_i + lambda_j.
 */
inline CMatrix solve_sylvester_skew(const CMatrix& g, const CMatrix& r) {
  if (g.rows() != g.cols() || r.rows() != r.cols() || g.rows() != r.rows()) {
    throw contract_error("solve_sylvester_skew: shape mismatch");
  }
  const Index n = g.rows();
  if (n == 0) return CMatrix(0, 0);
  const double rscale = std::max(r.norm(), 1e-300);
  if ((r + r.adjoint()).norm() > 1e-10 * rscale && r.norm() > 0.0) {
    throw contract_error("solve_sylvester_skew: right-hand side is not skew-Hermitian");
  }
  // Hermitize G so round-off from Z^H Z never trips the eigen contract.
  const CMatrix gh = 0.5 * (g + g.adjoint());
  const HermitianEigenSystem es = hermitian_eig(gh);
  const double lmax = es.eigenvalues(0);
  const double lmin = es.eigenvalues(n - 1);
  if (!(lmax > 0.0) || lmin <= 1e-12 * lmax) {
    throw rank_deficiency_error("solve_sylvester_skew: Gram matrix is singular");
  }
  const CMatrix& q = es.eigenvectors;
  CMatrix rt = q.adjoint() * r * q;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      rt(i, j) /= (es.eigenvalues(i) + es.eigenvalues(j));
    }
  }
  CMatrix b = q * rt * q.adjoint();
  // The exact solution is skew-Hermitian; strip the rounding drift.
  return 0.5 * (b - b.adjoint());
}

}  // namespace drjadce
