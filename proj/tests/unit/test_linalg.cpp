#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>

using namespace drjadce;
using namespace drjadce::testing;

namespace {

// Roots of the real characteristic cubic of a 3x3 Hermitian matrix, trigonometric form.
std::vector<double> cubic_eigenvalues(const CMatrix& c) {
  const double tr = c.trace().real();
  double minors = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) minors += (c(i, i) * c(j, j) - c(i, j) * c(j, i)).real();
  }
  const cplx det = c(0, 0) * (c(1, 1) * c(2, 2) - c(1, 2) * c(2, 1)) - c(0, 1) * (c(1, 0) * c(2, 2) - c(1, 2) * c(2, 0)) +
                   c(0, 2) * (c(1, 0) * c(2, 1) - c(1, 1) * c(2, 0));
  // x^3 - tr x^2 + minors x - det = 0; shift x = y + tr/3.
  const double a = tr / 3.0;
  const double p = minors - tr * tr / 3.0;
  const double q = -2.0 * a * a * a + a * minors - det.real();
  const double m = 2.0 * std::sqrt(-p / 3.0);
  const double phi = std::acos(std::clamp(3.0 * q / (p * m), -1.0, 1.0)) / 3.0;
  std::vector<double> out;
  for (int k = 0; k < 3; ++k) out.push_back(a + m * std::cos(phi - 2.0 * std::numbers::pi * k / 3.0));
  std::sort(out.rbegin(), out.rend());
  return out;
}

cplx cofactor_det(const CMatrix& m) {
  const Index n = m.rows();
  if (n == 1) return m(0, 0);
  cplx acc = 0.0;
  for (Index j = 0; j < n; ++j) {
    CMatrix minor(n - 1, n - 1);
    for (Index r = 1; r < n; ++r) {
      Index cc = 0;
      for (Index c = 0; c < n; ++c) {
        if (c != j) minor(r - 1, cc++) = m(r, c);
      }
    }
    acc += (j % 2 == 0 ? 1.0 : -1.0) * m(0, j) * cofactor_det(minor);
  }
  return acc;
}

}  // namespace

TEST(HermitianEig, IdentityHasUnitSpectrum) {
  const HermitianEigenSystem es = hermitian_eig(CMatrix::Identity(3, 3));
  EXPECT_TRUE(es.eigenvalues.isApprox(RVector::Ones(3)));
}

TEST(HermitianEig, DiagonalIsSortedDescendingWithPermutedIdentity) {
  CMatrix d = CMatrix::Zero(3, 3);
  d(0, 0) = 1.0;
  d(1, 1) = 4.0;
  d(2, 2) = 2.0;
  const HermitianEigenSystem es = hermitian_eig(d);
  EXPECT_NEAR(es.eigenvalues(0), 4.0, 1e-14);
  EXPECT_NEAR(es.eigenvalues(1), 2.0, 1e-14);
  EXPECT_NEAR(es.eigenvalues(2), 1.0, 1e-14);
  Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(3, 3);
  expect(1, 0) = expect(2, 1) = expect(0, 2) = 1.0;
  EXPECT_LT((es.eigenvectors.cwiseAbs() - expect).norm(), 1e-12);
}

TEST(HermitianEig, MatchesCharacteristicPolynomialRoots) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const CMatrix b = random_matrix(rng, 3, 3);
    const CMatrix c = b * b.adjoint();
    const HermitianEigenSystem es = hermitian_eig(0.5 * (c + c.adjoint()));
    const std::vector<double> roots = cubic_eigenvalues(c);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(es.eigenvalues(i), roots[static_cast<std::size_t>(i)], 1e-9 * roots[0]);
  }
}

TEST(HermitianEig, ReconstructionTraceAndDeterminant) {
  Rng rng(12);
  for (Index n : {2, 3, 4, 6}) {
    const CMatrix b = random_matrix(rng, n, n);
    const CMatrix c = 0.5 * (b * b.adjoint() + (b * b.adjoint()).adjoint());
    const HermitianEigenSystem es = hermitian_eig(c);
    for (Index i = 1; i < n; ++i) EXPECT_GE(es.eigenvalues(i - 1), es.eigenvalues(i));
    const CMatrix& d = es.eigenvectors;
    EXPECT_LE((c - d * es.eigenvalues.asDiagonal() * d.adjoint()).norm(), 1e-8 * c.norm());
    EXPECT_LE((d.adjoint() * d - CMatrix::Identity(n, n)).norm(), 1e-10);
    EXPECT_NEAR(es.eigenvalues.sum(), c.trace().real(), 1e-8 * std::abs(c.trace()));
    if (n <= 4) {
      const double det = cofactor_det(c).real();
      EXPECT_NEAR(es.eigenvalues.prod(), det, 1e-8 * std::abs(det));
    }
  }
}

TEST(HermitianEig, RejectsNonHermitianInput) {
  CMatrix c = CMatrix::Identity(3, 3);
  c(0, 1) = 0.5;
  EXPECT_THROW(hermitian_eig(c), contract_error);
  EXPECT_THROW(hermitian_eig(CMatrix::Ones(2, 3)), contract_error);
}

TEST(ThinSvd, ZeroMatrixHasZeroSingulars) {
  const ThinSVD svd = thin_svd(CMatrix::Zero(4, 3));
  ASSERT_EQ(svd.singulars.size(), 3);
  EXPECT_EQ(svd.singulars.maxCoeff(), 0.0);
}

TEST(ThinSvd, UnitaryHasUnitSingulars) {
  Rng rng(13);
  const ThinSVD svd = thin_svd(random_unitary(rng, 5));
  EXPECT_LT((svd.singulars - RVector::Ones(5)).norm(), 1e-12);
}

TEST(ThinSvd, RankOneOuterProduct) {
  Rng rng(14);
  CVector u = random_matrix(rng, 5, 1);
  CVector v = random_matrix(rng, 4, 1);
  u *= 2.0 / u.norm();
  v *= 3.0 / v.norm();
  const ThinSVD svd = thin_svd(u * v.adjoint());
  EXPECT_NEAR(svd.singulars(0), 6.0, 1e-12);
  EXPECT_LT(svd.singulars.tail(3).norm(), 1e-12);
}

TEST(ThinSvd, ReconstructsAndIsOrthonormal) {
  Rng rng(15);
  for (auto [r, c] : {std::pair<Index, Index>{6, 4}, {4, 6}, {5, 5}}) {
    const CMatrix y = random_matrix(rng, r, c);
    const ThinSVD svd = thin_svd(y);
    const Index k = std::min(r, c);
    EXPECT_LE((y - svd.left * svd.singulars.asDiagonal() * svd.rightH).norm(), 1e-8 * y.norm());
    EXPECT_LE((svd.left.adjoint() * svd.left - CMatrix::Identity(k, k)).norm(), 1e-9);
    EXPECT_LE((svd.rightH * svd.rightH.adjoint() - CMatrix::Identity(k, k)).norm(), 1e-9);
    for (Index i = 1; i < k; ++i) EXPECT_GE(svd.singulars(i - 1), svd.singulars(i));
    EXPECT_GE(svd.singulars.minCoeff(), 0.0);
  }
}

TEST(NumericalRank, CountsSignificantDirections) {
  Rng rng(16);
  const CMatrix y = random_matrix(rng, 6, 2) * random_matrix(rng, 2, 5);
  EXPECT_EQ(numerical_rank(y), 2);
  EXPECT_EQ(numerical_rank(CMatrix::Zero(3, 3)), 0);
}

TEST(Sylvester, IdentityGramHalvesRhs) {
  Rng rng(17);
  const CMatrix r = random_skew(rng, 4);
  EXPECT_LT((solve_sylvester_skew(CMatrix::Identity(4, 4), r) - 0.5 * r).norm(), 1e-14);
}

TEST(Sylvester, ZeroRhsGivesZero) {
  Rng rng(18);
  EXPECT_EQ(solve_sylvester_skew(random_hermitian_pd(rng, 3), CMatrix::Zero(3, 3)).norm(), 0.0);
}

TEST(Sylvester, MatchesKroneckerLinearSolve) {
  Rng rng(19);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 4;
    const CMatrix g = random_hermitian_pd(rng, n);
    const CMatrix r = random_skew(rng, n);
    // vec(G B + B G) = (I kron G + G^T kron I) vec(B), column-major vec.
    CMatrix k = CMatrix::Zero(n * n, n * n);
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i < n; ++i) {
        for (Index p = 0; p < n; ++p) {
          k(j * n + i, j * n + p) += g(i, p);  // (G B)_{ij} = sum_p G_ip B_pj
          k(j * n + i, p * n + i) += g(p, j);  // (B G)_{ij} = sum_p B_ip G_pj
        }
      }
    }
    const CVector vec_r = Eigen::Map<const CVector>(r.data(), n * n);
    const CVector vec_b = k.fullPivLu().solve(vec_r);
    const CMatrix oracle = Eigen::Map<const CMatrix>(vec_b.data(), n, n);
    const CMatrix b = solve_sylvester_skew(g, r);
    EXPECT_LT(rel_err(b, oracle), 1e-10);
    EXPECT_LE((g * b + b * g - r).norm(), 1e-9 * r.norm());
    EXPECT_LE((b + b.adjoint()).norm(), 1e-9 * b.norm());
  }
}

TEST(Sylvester, SingularGramIsRankDeficient) {
  CMatrix g = CMatrix::Identity(3, 3);
  g(2, 2) = 0.0;
  Rng rng(20);
  EXPECT_THROW(solve_sylvester_skew(g, random_skew(rng, 3)), rank_deficiency_error);
}

TEST(Sylvester, RejectsNonSkewRhs) {
  EXPECT_THROW(solve_sylvester_skew(CMatrix::Identity(2, 2), CMatrix::Identity(2, 2)), contract_error);
}

TEST(Finite, RequireFiniteFlagsNaN) {
  CMatrix m = CMatrix::Zero(2, 2);
  m(1, 0) = cplx(std::nan(""), 0.0);
  EXPECT_THROW(require_finite(m, "m"), numerical_error);
}
