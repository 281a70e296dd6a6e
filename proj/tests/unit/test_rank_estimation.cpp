#include "support.hpp"

#include <gtest/gtest.h>

using namespace drjadce;
using namespace drjadce::testing;

namespace {

CMatrix low_rank_signal(Rng& rng, Index l, Index m, Index r) {
  return rng.complex_normal(l, r) * rng.complex_normal(r, m);
}

}  // namespace

TEST(RegularizedCovariance, BetaOneIsIdentity) {
  Rng rng(1);
  const CMatrix c = regularized_covariance(rng.complex_normal(5, 7), 1.0);
  EXPECT_LT((c - CMatrix::Identity(5, 5)).norm(), 1e-15);
}

TEST(RegularizedCovariance, ZeroDataIsScaledIdentity) {
  const CMatrix c = regularized_covariance(CMatrix::Zero(4, 6), 0.5);
  EXPECT_LT((c - 0.5 * CMatrix::Identity(4, 4)).norm(), 1e-15);
}

TEST(RegularizedCovariance, OuterProductAverage) {
  CMatrix y = CMatrix::Zero(3, 5);
  y.row(0).setOnes();
  CMatrix expect = CMatrix::Zero(3, 3);
  expect(0, 0) = 1.0;
  EXPECT_LT((regularized_covariance(y, 0.0) - expect).norm(), 1e-15);
}

TEST(RegularizedCovariance, RejectsBetaOutsideUnitInterval) {
  EXPECT_THROW(regularized_covariance(CMatrix::Zero(2, 2), 1.5), contract_error);
  EXPECT_THROW(regularized_covariance(CMatrix::Zero(2, 2), -0.1), contract_error);
}

TEST(DefaultU, SquareCase) { EXPECT_NEAR(default_u(7, 7), 0.9682233833280655, 1e-12); }

TEST(DefaultU, WideApertureLimit) { EXPECT_NEAR(default_u(1, 1000000), 0.6, 1e-2); }

TEST(DefaultU, PaperScaleGolden) { EXPECT_NEAR(default_u(256, 90), 1.0347010335373157, 1e-12); }

TEST(CmCriterion, HandComputedValue) {
  RVector lam(4);
  lam << 4, 2, 1, 1;
  EXPECT_NEAR(cm_criterion(lam, 1, 0.0, 10), -2.249340578475233, 1e-12);
}

TEST(CmCriterion, FlatSpectrumIsRankUninformative) {
  const RVector lam = RVector::Constant(6, 2.5);
  for (Index r = 1; r <= 5; ++r) EXPECT_NEAR(cm_criterion(lam, r, 0.0, 10), -6.0 * std::log(2.5), 1e-12);
  for (Index r = 2; r <= 5; ++r) EXPECT_LT(cm_criterion(lam, r, 0.8, 10), cm_criterion(lam, r - 1, 0.8, 10));
}

TEST(CmCriterion, RankOutsideRangeThrows) {
  const RVector lam = RVector::Ones(4);
  EXPECT_THROW(cm_criterion(lam, 0, 0.5, 4), std::out_of_range);
  EXPECT_THROW(cm_criterion(lam, 4, 0.5, 4), std::out_of_range);
}

TEST(EstimateRank, NoiselessLowRankIsExact) {
  Rng rng(2);
  for (Index r : {1, 3, 6}) {
    const CMatrix y = low_rank_signal(rng, 20, 64, r);
    const RankSelection sel = estimate_rank(y, 1e-3, default_u(64, 20));
    EXPECT_EQ(sel.r_hat, r);
  }
}

TEST(EstimateRank, SelectionIsArgmaxAndTailMean) {
  Rng rng(3);
  const CMatrix y = low_rank_signal(rng, 12, 40, 3) + rng.complex_normal(12, 40);
  const RankSelection sel = estimate_rank(y, 0.3, 0.9);
  ASSERT_EQ(static_cast<Index>(sel.cm_values.size()), 11);
  const auto best = std::max_element(sel.cm_values.begin(), sel.cm_values.end());
  EXPECT_EQ(sel.r_hat, 1 + (best - sel.cm_values.begin()));
  EXPECT_NEAR(sel.sigma2_hat, sel.eigenvalues.tail(12 - sel.r_hat).mean(), 1e-14);
  const RankSelection again = estimate_rank(y, 0.3, 0.9);
  EXPECT_EQ(again.r_hat, sel.r_hat);
  EXPECT_EQ(again.cm_values, sel.cm_values);
}

TEST(EstimateRank, TiesResolveToSmallerRank) {
  // Flat spectrum with u = 0 makes every CM(r) equal.
  const RankSelection sel = estimate_rank(CMatrix::Zero(5, 8), 0.7, 0.0);
  EXPECT_EQ(sel.r_hat, 1);
}

TEST(EstimateRank, PureNoiseRarelySelectsSignal) {
  Rng rng(4);
  int ok = 0;
  for (int t = 0; t < 200; ++t) {
    if (estimate_rank(rng.complex_normal(40, 256)).r_hat <= 2) ++ok;
  }
  EXPECT_GE(ok, 190);
}

TEST(EstimateRank, NoiseLevelEstimateConverges) {
  Rng rng(5);
  const double beta = 0.5;
  const RankSelection sel = estimate_rank(rng.complex_normal(16, 4096), beta, default_u(4096, 16));
  EXPECT_NEAR(sel.sigma2_hat, beta + (1.0 - beta) * 1.0, 0.05);
}

TEST(DefaultBeta, LiesInUnitIntervalAndSolvesEdgeCondition) {
  for (auto [l, m] : {std::pair<Index, Index>{40, 128}, {90, 256}, {25, 32}, {8, 12}}) {
    const double u = default_u(m, l);
    const double beta = default_beta(l, m, u);
    EXPECT_GT(beta, 0.0);
    EXPECT_LT(beta, 1.0);
    const double edge = std::pow(1.0 + std::sqrt(double(l) / double(m)), 2);
    const double x = beta + (1.0 - beta) * edge;
    EXPECT_NEAR(x - 1.0 - std::log(x), u * 0.75 * double(l) / double(m), 1e-9);
  }
}

TEST(DefaultBeta, SpectralRatioHeuristicIsSmallOnNoise) {
  Rng rng(6);
  const CMatrix y = rng.complex_normal(40, 128);
  const RVector lam = hermitian_eig(regularized_covariance(y, 0.0)).eigenvalues;
  EXPECT_LT(spectral_ratio_beta(lam, 128), 0.5);
  EXPECT_DOUBLE_EQ(spectral_ratio_beta(RVector::Zero(3), 4), 1.0);
}

TEST(RankForReduction, WideApertureUsesDualSpectrum) {
  Rng rng(7);
  // L > M: the L x L covariance has L - M exact zero modes.
  const CMatrix y = 10.0 * low_rank_signal(rng, 30, 12, 4) + rng.complex_normal(30, 12);
  const RankSelection sel = estimate_rank_for_reduction(y);
  EXPECT_EQ(sel.r_hat, 4);
  EXPECT_EQ(sel.eigenvectors.rows(), 30);
  EXPECT_EQ(sel.noise_subspace(4).cols(), 26);
}

TEST(RankForReduction, OverridesArePassedThrough) {
  Rng rng(8);
  const CMatrix y = rng.complex_normal(10, 30);
  RankOptions opt;
  opt.beta = 0.25;
  opt.u = 0.7;
  const RankSelection sel = estimate_rank_for_reduction(y, opt);
  EXPECT_DOUBLE_EQ(sel.beta, 0.25);
  EXPECT_DOUBLE_EQ(sel.u, 0.7);
}

TEST(RankForReduction, SuccessRateGrowsWithPower) {
  // Desk shape: success at high power, no success far below the detectability edge.
  SystemConfig cfg;
  cfg.n_devices = 120;
  cfg.pilot_len = 40;
  cfg.n_antennas = 128;
  cfg.activity = FixedActiveCount{12};
  std::vector<int> wins;
  for (double p : {0.0, 10.0, 20.0}) {
    cfg.pilot_power_dbm = p;
    int w = 0;
    for (std::uint64_t s = 1; s <= 10; ++s) {
      cfg.seed = s;
      const Instance inst = generate_instance(cfg);
      if (estimate_rank_for_reduction(inst.y / std::sqrt(inst.noise_var)).r_hat == 12) ++w;
    }
    wins.push_back(w);
  }
  EXPECT_LE(wins[0], wins[1]);
  EXPECT_LE(wins[1], wins[2]);
  EXPECT_EQ(wins[2], 10);
}
