#include "cogis/gpis.hpp"
#include "cogis/normal.hpp"
#include "cogis/rng.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace cogis;

namespace {

Vec v2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

Box unit_box() { return Box{v2(0, 0), v2(1, 1)}; }

/// Everything left of x = 0.5 is visibly free.
struct HalfPlaneOracle final : FreeSpaceOracle {
  bool visibly_free(const Eigen::Ref<const Vec>& x) const override { return x[0] < 0.5; }
};

double reference_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

TEST(Normal, QuantileRoundTrip) {
  for (double p = 1e-4; p < 1.0 - 1e-4; p += 1e-3)
    EXPECT_NEAR(reference_cdf(inv_norm_cdf(p)), p, 1e-8) << p;
  EXPECT_EQ(inv_norm_cdf(0.5), 0.0);
  EXPECT_THROW(inv_norm_cdf(0.0), ContractViolation);
  EXPECT_THROW(inv_norm_cdf(1.0), ContractViolation);
}

TEST(Normal, CdfMatchesErfc) {
  for (double x = -8; x <= 8; x += 0.01) EXPECT_NEAR(norm_cdf(x), reference_cdf(x), 1e-15);
}

TEST(Normal, QuantileIsOddAndMonotone) {
  double prev = -INFINITY;
  for (double p = 1e-6; p < 0.5; p *= 1.3) {
    const double z = inv_norm_cdf(p);
    EXPECT_GT(z, prev);
    EXPECT_NEAR(z, -inv_norm_cdf(1.0 - p), 1e-9);
    prev = z;
  }
}

TEST(Gpis, EmptySurfaceIsOccupiedEverywhere) {
  const Gpis s(2);
  EXPECT_EQ(s.predict(v2(0.3, 0.3)).mean, 0.0);
  const auto grid = s.occupancy_grid(unit_box(), 0.25);
  ASSERT_EQ(grid.cell_count(), 16u);
  for (std::size_t i = 0; i < grid.cell_count(); ++i) EXPECT_TRUE(grid.occupied(i));
}

TEST(Gpis, GoalSeedGivesPositiveMeanAndIsIdempotent) {
  const Gpis s = Gpis(2).seed_with_goal({v2(0.5, 0.5)});
  EXPECT_GT(s.predict(v2(0.5, 0.5)).mean, 0.9);
  const Gpis again = s.seed_with_goal({v2(0.5, 0.5)});
  EXPECT_EQ(again.active().size(), 1);
  EXPECT_EQ(again.goal_seeds().size(), 1u);
}

TEST(Gpis, PriorMeanShiftsFarFieldAndMatchesOracle) {
  Mat x(2, 3);
  x << 0.2, 0.5, 0.8, 0.2, 0.6, 0.3;
  Vec y(3);
  y << -1.0, 0.4, 1.0;
  const gp::KernelParams p{0.15, 1.0, 1e-4};
  const Gpis s = Gpis(2, p).with_training(gp::TrainingSet(x, y)).with_prior_mean(0.2);
  Rng rng(2);
  for (int k = 0; k < 50; ++k) {
    const Vec q = v2(rng.uniform(), rng.uniform());
    const auto got = s.predict_raw(q);
    const auto ref = oracle::gp_posterior(x, y, q, p.lengthscale, p.outputscale, p.noise, 0.2);
    EXPECT_NEAR(got.mean, ref.mean, 1e-9);
    EXPECT_NEAR(got.variance, ref.variance, 1e-9);
  }
  EXPECT_NEAR(s.predict(v2(50.0, 50.0)).mean, 0.2, 1e-12);
}

TEST(Gpis, FreeSpaceOverrideTouchesMeanOnly) {
  Mat x(2, 1);
  x << 0.3, 0.3;
  const Vec y = Vec::Constant(1, -1.0);
  const Gpis plain = Gpis(2).with_training(gp::TrainingSet(x, y));
  const Gpis seen = plain.with_oracle(std::make_shared<HalfPlaneOracle>());
  const auto raw = seen.predict_raw(v2(0.3, 0.3));
  const auto post = seen.predict(v2(0.3, 0.3));
  EXPECT_LT(raw.mean, 0.0);
  EXPECT_EQ(post.mean, 1.0);
  EXPECT_EQ(post.variance, raw.variance);
  EXPECT_EQ(seen.predict(v2(0.7, 0.3)).mean, plain.predict(v2(0.7, 0.3)).mean);
}

TEST(Gpis, BatchMatchesPointwise) {
  Rng rng(9);
  Mat x(2, 12);
  Vec y(12);
  for (int j = 0; j < 12; ++j) {
    x.col(j) = v2(rng.uniform(), rng.uniform());
    y[j] = rng.uniform(-1, 1);
  }
  const Gpis s = Gpis(2).with_training(gp::TrainingSet(x, y)).with_oracle(std::make_shared<HalfPlaneOracle>());
  Mat q(2, 40);
  for (int j = 0; j < 40; ++j) q.col(j) = v2(rng.uniform(), rng.uniform());
  Vec m, v;
  s.predict_batch(q, &m, &v);
  for (int j = 0; j < 40; ++j) {
    EXPECT_NEAR(m[j], s.predict(q.col(j)).mean, 1e-12);
    EXPECT_NEAR(v[j], s.predict(q.col(j)).variance, 1e-12);
  }
}

TEST(Gpis, LcbAtHalfIsMean) {
  Mat x(2, 2);
  x << 0.1, 0.9, 0.1, 0.9;
  Vec y(2);
  y << -1.0, 1.0;
  const Gpis s = Gpis(2).with_training(gp::TrainingSet(x, y));
  Rng rng(1);
  for (int k = 0; k < 100; ++k) {
    const Vec q = v2(rng.uniform(), rng.uniform());
    EXPECT_NEAR(s.lcb(q, 0.5), s.predict(q).mean, 1e-12);
    EXPECT_LE(s.lcb(q, 0.3), s.predict(q).mean);
  }
  EXPECT_THROW((void)s.lcb(v2(0, 0), 1.0), ContractViolation);
}

TEST(Gpis, DedupKeepsLatestLabel) {
  Mat x(1, 3);
  x << 0.2, 0.5, 0.2;
  Vec y(3);
  y << -1.0, 0.0, 0.7;
  const auto d = dedup_latest(gp::TrainingSet(x, y));
  ASSERT_EQ(d.size(), 2);
  EXPECT_EQ(d.points(0, 0), 0.5);
  EXPECT_EQ(d.labels[1], 0.7);
}

TEST(Gpis, RejectsBadLabels) {
  Mat x(2, 1);
  x << 0.1, 0.1;
  EXPECT_THROW((void)Gpis(2).with_training(gp::TrainingSet(x, Vec::Constant(1, 1.5))), ContractViolation);
}

TEST(Grid, CoveringIndexRoundTrip) {
  const auto g = OccupancyGrid::covering(Box{v2(-1, 0), v2(1, 0.5)}, 0.1);
  EXPECT_EQ(g.shape, (std::vector<int>{20, 5}));
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    EXPECT_EQ(g.linear_index(g.unravel(i)), i);
    EXPECT_EQ(g.cell_of(g.cell_center(i)), i);
  }
  EXPECT_FALSE(g.cell_of(v2(5, 5)).has_value());
}

TEST(Grid, TextRoundTrip2dAnd3d) {
  Rng rng(4);
  for (int d : {2, 3}) {
    Box b{Vec::Zero(d), Vec::Constant(d, 1.0)};
    auto g = OccupancyGrid::covering(b, 0.2);
    for (auto& c : g.cells) c = rng.uniform() < 0.4;
    std::stringstream ss;
    write_grid(ss, g);
    EXPECT_EQ(read_grid(ss), g);
  }
  std::istringstream bad("2 0.1 0 0 3 3\n010\n");
  EXPECT_THROW(read_grid(bad), IoError);
}
