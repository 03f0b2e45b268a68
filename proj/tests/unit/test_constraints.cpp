#include "cogis/constraints.hpp"
#include "cogis/rng.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace cogis;
using namespace cogis::constraints;

namespace {

Vec v2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

OccupancyGrid random_grid(Rng& rng, std::vector<int> shape, double density) {
  Box b{Vec::Zero(static_cast<Eigen::Index>(shape.size())), Vec::Zero(static_cast<Eigen::Index>(shape.size()))};
  for (std::size_t a = 0; a < shape.size(); ++a) b.hi[static_cast<Eigen::Index>(a)] = shape[a];
  auto g = OccupancyGrid::covering(b, 1.0);
  for (auto& c : g.cells) c = rng.uniform() < density;
  return g;
}

/// Ring of interior points around (0.5, 0.5) plus a goal seed at the center.
Gpis ring_surface(double radius, int points) {
  Mat x(2, points);
  Vec y = Vec::Constant(points, -1.0);
  for (int j = 0; j < points; ++j) {
    const double a = 2.0 * 3.14159265358979 * j / points;
    x.col(j) = v2(0.5 + radius * std::cos(a), 0.5 + radius * std::sin(a));
  }
  return Gpis(2, {0.05, 1.0, 1e-4})
      .with_training(gp::TrainingSet(x, y))
      .with_prior_mean(0.2)
      .seed_with_goal({v2(0.5, 0.5)});
}

}  // namespace

TEST(ConnectedComponents, MatchesFloodFill2d) {
  Rng rng(31);
  for (int k = 0; k < 60; ++k) {
    const int w = 1 + static_cast<int>(rng.uniform() * 40);
    const int h = 1 + static_cast<int>(rng.uniform() * 40);
    const auto g = random_grid(rng, {w, h}, rng.uniform(0.2, 0.7));
    EXPECT_EQ(connected_components(g), oracle::flood_fill(g.cells, g.shape));
  }
}

TEST(ConnectedComponents, MatchesFloodFill3d) {
  Rng rng(32);
  for (int k = 0; k < 20; ++k) {
    const auto g = random_grid(rng, {1 + k % 7, 3 + k % 5, 2 + k % 4}, rng.uniform(0.3, 0.8));
    EXPECT_EQ(connected_components(g), oracle::flood_fill(g.cells, g.shape));
  }
}

TEST(ConnectedComponents, DiagonalNeighboursConnect) {
  auto g = OccupancyGrid::covering(Box{v2(0, 0), v2(2, 2)}, 1.0);
  g.cells = {0, 1, 1, 0};
  const auto labels = connected_components(g);
  EXPECT_EQ(labels, (std::vector<int>{0, -1, -1, 0}));
}

TEST(PathExists, GridPathQueries) {
  auto g = OccupancyGrid::covering(Box{v2(0, 0), v2(5, 5)}, 1.0);
  for (int y = 0; y < 5; ++y) g.cells[static_cast<std::size_t>(y * 5 + 2)] = 1;  // full wall at x = 2
  EXPECT_FALSE(path_exists_on_grid(g, v2(0.5, 0.5), {v2(4.5, 4.5)}));
  EXPECT_TRUE(path_exists_on_grid(g, v2(0.5, 0.5), {v2(1.5, 4.5)}));
  g.cells[22] = 0;  // open the top
  EXPECT_TRUE(path_exists_on_grid(g, v2(0.5, 0.5), {v2(4.5, 4.5)}));
  EXPECT_FALSE(path_exists_on_grid(g, v2(2.5, 0.5), {v2(4.5, 4.5)}));  // start blocked
  EXPECT_FALSE(path_exists_on_grid(g, v2(9, 9), {v2(4.5, 4.5)}));      // outside
}

TEST(PathExists, RingBlocksAndConstraintAgreesWithFreeFunction) {
  const Box bounds{v2(0, 0), v2(1, 1)};
  const Context ctx{StateSet::single(v2(0.1, 0.1)), {v2(0.5, 0.5)}};
  const PathExists c(bounds, 0.01);
  for (int points : {6, 40}) {
    const Gpis s = ring_surface(0.2, points);
    EXPECT_EQ(c.evaluate(s, ctx), path_exists(s, v2(0.1, 0.1), ctx.goals, bounds, 0.01));
  }
  EXPECT_FALSE(c.evaluate(ring_surface(0.2, 40), ctx));
  EXPECT_TRUE(c.evaluate(ring_surface(0.2, 4), ctx));
}

TEST(NoPenetration, HalfQuantileEqualsMeanCheck) {
  Rng rng(41);
  const Gpis s = ring_surface(0.25, 12);
  const NoPenetration np(0.5);
  for (int k = 0; k < 300; ++k) {
    StateSet x(2, 2);
    x.col(0) = v2(rng.uniform(), rng.uniform());
    x.col(1) = v2(rng.uniform(), rng.uniform());
    const bool mean_ok = s.predict(x.col(0)).mean > 0.0 && s.predict(x.col(1)).mean > 0.0;
    EXPECT_EQ(np.evaluate(s, {x, {}}), mean_ok);
    EXPECT_EQ(no_penetration(s, x, 0.5), mean_ok);
  }
}

TEST(NoPenetration, LowerZetaIsMoreConservative) {
  Rng rng(42);
  const Gpis s = ring_surface(0.25, 12);
  for (int k = 0; k < 300; ++k) {
    const StateSet x = StateSet::single(v2(rng.uniform(), rng.uniform()));
    if (no_penetration(s, x, 0.2)) EXPECT_TRUE(no_penetration(s, x, 0.4));
  }
  EXPECT_THROW(NoPenetration(0.0), ContractViolation);
}

TEST(HAll, ConjunctionAndSubset) {
  const Box bounds{v2(0, 0), v2(1, 1)};
  const Gpis s = ring_surface(0.2, 40);
  std::vector<contact::DataPoint> active;
  const auto& t = s.active();
  for (Eigen::Index j = 0; j < t.size(); ++j)
    active.push_back({t.points.col(j), t.labels[j], t.labels[j] > 0 ? contact::Source::GoalSeed : contact::Source::Observed, false});
  const ConstraintSet set({std::make_shared<PathExists>(bounds, 0.01)});
  const Context ctx{StateSet::single(v2(0.1, 0.1)), {v2(0.5, 0.5)}};
  std::vector<bool> keep(active.size(), true);
  EXPECT_FALSE(h_all(set, s, active, keep, ctx));
  for (std::size_t j = 0; j < 8; ++j) keep[j] = false;  // open a gap
  EXPECT_TRUE(h_all(set, s, active, keep, ctx));
  EXPECT_THROW(ConstraintSet(std::vector<std::shared_ptr<const Constraint>>{}), ContractViolation);
}
