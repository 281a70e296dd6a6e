#include "support.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace drjadce;
using namespace drjadce::testing;

TEST(Units, DefaultNoiseVariance) {
  SystemConfig cfg;
  // -160 dBm/Hz over 1 MHz: 10^((-160-30)/10) * 1e6 W.
  EXPECT_NEAR(cfg.noise_var(), 1e-13, 1e-25);
  EXPECT_NEAR(dbm_to_watts(30.0), 1.0, 1e-15);
  EXPECT_NEAR(cfg.pathloss(), 5.011872336272722e-13, 1e-25);
}

TEST(Pilots, UnitColumnNormsAndDeterminism) {
  SystemConfig cfg;
  Rng r1(5), r2(5);
  const CMatrix a = generate_pilots(cfg, r1);
  const CMatrix b = generate_pilots(cfg, r2);
  ASSERT_EQ(a.rows(), cfg.pilot_len);
  ASSERT_EQ(a.cols(), cfg.n_devices);
  for (Index n = 0; n < a.cols(); ++n) EXPECT_NEAR(a.col(n).norm(), 1.0, 1e-12);
  EXPECT_EQ((a - b).norm(), 0.0);
}

TEST(Pilots, RandomSubmatricesHaveFullRank) {
  SystemConfig cfg;
  cfg.pilot_len = 90;
  cfg.n_devices = 300;
  Rng rng(6);
  const CMatrix a = generate_pilots(cfg, rng);
  Rng pick(7);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Index> idx(300);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), pick.engine());
    CMatrix sub(90, 60);
    for (Index j = 0; j < 60; ++j) sub.col(j) = a.col(idx[static_cast<std::size_t>(j)]);
    EXPECT_EQ(numerical_rank(sub), 60);
  }
}

TEST(Activity, FixedCountMode) {
  SystemConfig cfg;
  cfg.n_devices = 50;
  cfg.activity = FixedActiveCount{5};
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(s);
    const ActivityPattern p = generate_activity(cfg, rng);
    EXPECT_EQ(p.count(), 5);
    EXPECT_EQ(std::accumulate(p.indicators.begin(), p.indicators.end(), 0), 5);
    EXPECT_TRUE(std::is_sorted(p.active_set.begin(), p.active_set.end()));
    for (Index k : p.active_set) EXPECT_EQ(p.indicators[static_cast<std::size_t>(k)], 1);
  }
}

TEST(Activity, BernoulliFractionConcentrates) {
  SystemConfig cfg;
  cfg.n_devices = 10000;
  cfg.activity = ActivityProbability{0.1};
  Rng rng(8);
  const ActivityPattern p = generate_activity(cfg, rng);
  // sd of the fraction is 0.003; the window is about 3.3 sd wide on each side.
  const double frac = static_cast<double>(p.count()) / 10000.0;
  EXPECT_GE(frac, 0.09);
  EXPECT_LE(frac, 0.11);
}

TEST(Activity, VanishingProbabilityGivesEmptySet) {
  SystemConfig cfg;
  cfg.activity = ActivityProbability{1e-9};
  Rng rng(9);
  EXPECT_EQ(generate_activity(cfg, rng).count(), 0);
}

TEST(Activity, FixedCountSubsetIsUniform) {
  // Each of N = 6 devices should be active with probability K/N = 1/3.
  SystemConfig cfg;
  cfg.n_devices = 6;
  cfg.activity = FixedActiveCount{2};
  std::vector<int> hits(6, 0);
  const int trials = 6000;
  Rng rng(10);
  for (int t = 0; t < trials; ++t) {
    for (Index k : generate_activity(cfg, rng).active_set) ++hits[static_cast<std::size_t>(k)];
  }
  for (int h : hits) EXPECT_NEAR(h / double(trials), 1.0 / 3.0, 0.03);
}

TEST(Synthesize, NoiselessZeroActivityGivesZero) {
  SystemConfig cfg;
  cfg.activity = FixedActiveCount{0};
  cfg.noise_var_override = 0.0;
  const Instance inst = generate_instance(cfg);
  EXPECT_EQ(inst.y.norm(), 0.0);
}

TEST(Synthesize, NoiselessYEqualsAX) {
  SystemConfig cfg;
  cfg.noise_var_override = 0.0;
  const Instance inst = generate_instance(cfg);
  EXPECT_EQ((inst.y - inst.a * inst.x).norm(), 0.0);
}

TEST(Synthesize, RowsFollowActivityAndEnergy) {
  SystemConfig cfg;
  cfg.activity = FixedActiveCount{7};
  const Instance inst = generate_instance(cfg);
  for (Index n = 0; n < inst.n(); ++n) {
    if (inst.activity.indicators[static_cast<std::size_t>(n)]) {
      EXPECT_LT((inst.x.row(n) - std::sqrt(cfg.energy()) * inst.channels.h.row(n)).norm(), 1e-20);
    } else {
      EXPECT_EQ(inst.x.row(n).norm(), 0.0);
    }
  }
  EXPECT_DOUBLE_EQ(inst.energies[0], cfg.pilot_len * cfg.pilot_power_w());
}

TEST(Synthesize, NoiseHasConfiguredVariance) {
  SystemConfig cfg;
  cfg.pilot_len = 64;
  cfg.n_antennas = 256;
  cfg.activity = FixedActiveCount{0};
  const Instance inst = generate_instance(cfg);
  const double emp = inst.y.squaredNorm() / static_cast<double>(inst.y.size());
  EXPECT_NEAR(emp / cfg.noise_var(), 1.0, 0.03);
}

TEST(Synthesize, ChannelEntriesHavePathlossVariance) {
  SystemConfig cfg;
  cfg.n_devices = 200;
  cfg.n_antennas = 100;
  const Instance inst = generate_instance(cfg);
  const double emp = inst.channels.h.squaredNorm() / static_cast<double>(inst.channels.h.size());
  EXPECT_NEAR(emp / cfg.pathloss(), 1.0, 0.03);
}

TEST(Synthesize, RankOfXEqualsK) {
  SystemConfig cfg;
  cfg.activity = FixedActiveCount{6};
  cfg.n_antennas = 16;
  for (std::uint64_t s = 1; s <= 10; ++s) {
    cfg.seed = s;
    EXPECT_EQ(numerical_rank(generate_instance(cfg).x), 6);
  }
}

TEST(Synthesize, ProjectionPreservesRank) {
  // rank(A X) = rank(X) whenever L >= 2K.
  SystemConfig cfg;
  cfg.n_devices = 60;
  cfg.pilot_len = 20;
  cfg.n_antennas = 12;
  cfg.noise_var_override = 0.0;
  for (std::uint64_t s = 1; s <= 50; ++s) {
    cfg.seed = s;
    cfg.activity = FixedActiveCount{static_cast<Index>(1 + s % 10)};
    const Instance inst = generate_instance(cfg);
    EXPECT_EQ(numerical_rank(inst.a * inst.x), numerical_rank(inst.x)) << "seed " << s;
  }
}

TEST(Synthesize, SameSeedSameInstanceDifferentSeedDifferent) {
  SystemConfig cfg;
  const Instance a = generate_instance(cfg);
  const Instance b = generate_instance(cfg);
  EXPECT_EQ((a.y - b.y).norm(), 0.0);
  cfg.seed = 2;
  EXPECT_GT((a.y - generate_instance(cfg).y).norm(), 0.0);
}

TEST(Synthesize, RejectsInconsistentShapes) {
  SystemConfig cfg;
  Rng rng(1);
  const CMatrix a = generate_pilots(cfg, rng);
  const ActivityPattern act = generate_activity(cfg, rng);
  SystemConfig other = cfg;
  other.n_antennas = 3;
  const ChannelMatrix h = generate_channels(other, rng);
  EXPECT_THROW(synthesize(cfg, a, act, h, rng), contract_error);
}

TEST(Config, ValidateRejectsBadValues) {
  SystemConfig cfg;
  cfg.activity = ActivityProbability{1.5};
  EXPECT_THROW(cfg.validate(), contract_error);
  cfg.activity = FixedActiveCount{101};
  EXPECT_THROW(cfg.validate(), contract_error);
  cfg.activity = FixedActiveCount{3};
  cfg.pilot_len = 0;
  EXPECT_THROW(cfg.validate(), contract_error);
}

TEST(Rng, SplitStreamsAreDeterministicAndDistinct) {
  const Rng root(42);
  Rng a = root.split({1, 2});
  Rng b = root.split({1, 2});
  Rng c = root.split({2, 1});
  EXPECT_EQ(a.engine()(), b.engine()());
  EXPECT_NE(root.split({1, 2}).seed(), c.seed());
  EXPECT_NE(derive_seed(1, {0}), derive_seed(2, {0}));
}
