#include "cogis/cmawm.hpp"
#include "cogis/constraints.hpp"
#include "cogis/normal.hpp"
#include "cogis/refine.hpp"
#include "cogis/rng.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace cogis;
using namespace cogis::refine;
using contact::DataPoint;
using contact::Source;

namespace {

Vec v2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

std::vector<DataPoint> ring(double radius, int points, bool with_exterior) {
  std::vector<DataPoint> d;
  for (int j = 0; j < points; ++j) {
    const double a = 2.0 * 3.14159265358979 * j / points;
    d.push_back({v2(0.5 + radius * std::cos(a), 0.5 + radius * std::sin(a)), -1.0, Source::Predicted, false});
    if (with_exterior)
      d.push_back({v2(0.5 + (radius + 0.05) * std::cos(a), 0.5 + (radius + 0.05) * std::sin(a)), 0.0,
                   Source::Observed, false});
  }
  d.push_back({v2(0.5, 0.5), 1.0, Source::GoalSeed, false});
  return d;
}

Gpis base_surface() { return Gpis(2, {0.05, 1.0, 1e-4}).with_prior_mean(0.2); }

}  // namespace

TEST(Weights, SoftmaxOfKernelRowSums) {
  Rng rng(1);
  std::vector<DataPoint> mem, act;
  for (int j = 0; j < 9; ++j) mem.push_back({v2(rng.uniform(), rng.uniform()), -1.0, Source::Observed, false});
  for (int j = 0; j < 5; ++j) act.push_back(mem[static_cast<std::size_t>(2 * j % 9)]);
  const gp::KernelParams p{0.2, 1.5, 1e-4};
  const Vec c = compute_weights(mem, act, p);
  Vec s(5);
  for (int j = 0; j < 5; ++j) {
    s[j] = 0.0;
    for (const auto& m : mem) s[j] += oracle::matern32((act[static_cast<std::size_t>(j)].point - m.point).norm(), 0.2, 1.5);
  }
  const Vec e = s.array().exp().matrix();
  for (int j = 0; j < 5; ++j) EXPECT_NEAR(c[j], e[j] / e.sum(), 1e-12);
  EXPECT_NEAR(c.sum(), 1.0, 1e-12);
  EXPECT_THROW(compute_weights(mem, {}, p), ContractViolation);
}

TEST(Cmawm, MarginKeepsMinorityProbability) {
  Cmawm es(6, 20, 3);
  Rng rng(5);
  for (int g = 0; g < 60; ++g) {
    const Mat x = es.ask();
    std::vector<double> values(20);
    // drive every coordinate hard toward 1
    for (int k = 0; k < 20; ++k) values[static_cast<std::size_t>(k)] = -x.col(k).sum();
    es.tell(x, values);
    for (Eigen::Index i = 0; i < 6; ++i) EXPECT_GE(es.minority_probability(i), es.margin() * (1 - 1e-9));
  }
  EXPECT_NEAR(es.margin(), 1.0 / (20.0 * 6.0), 1e-15);
  EXPECT_EQ(es.generation(), 60);
}

TEST(Cmawm, SameSeedSameSamples) {
  Cmawm a(5, 10, 42), b(5, 10, 42), c(5, 10, 43);
  const Mat xa = a.ask();
  EXPECT_EQ(xa, b.ask());
  EXPECT_NE(xa, c.ask());
  EXPECT_EQ(Cmawm::binarize(v2(0.5, 0.49)), (std::vector<bool>{true, false}));
}

TEST(RunCmawm, UnconstrainedReturnsAllOnes) {
  Problem p{Vec::Constant(6, 1.0 / 6), Mask(6, false), [](const Mask&) { return true; }};
  const auto r = run_cmawm(p, {5, 20, 1, 1});
  EXPECT_TRUE(r.found_feasible);
  EXPECT_EQ(r.omega, Mask(6, true));
  EXPECT_NEAR(r.phi, -1.0, 1e-12);
}

TEST(RunCmawm, InfeasibleReportsAllOnes) {
  Problem p{Vec::Constant(4, 0.25), Mask(4, false), [](const Mask&) { return false; }};
  const auto r = run_cmawm(p, {5, 20, 1, 1});
  EXPECT_FALSE(r.found_feasible);
  EXPECT_EQ(r.omega, Mask(4, true));
  EXPECT_EQ(r.evaluations, 1 + 5 * 20);
}

TEST(RunCmawm, MatchesBruteForceOnSmallInstances) {
  Rng rng(77);
  int optimal = 0;
  for (int inst = 0; inst < 20; ++inst) {
    const int m = 4 + inst % 6;
    Vec c(m);
    for (int j = 0; j < m; ++j) c[j] = rng.uniform(0.1, 1.0);
    c /= c.sum();
    // "remove at least one of these pairs" constraints
    std::vector<std::pair<int, int>> pairs;
    for (int k = 0; k < 2; ++k)
      pairs.emplace_back(static_cast<int>(rng.uniform() * m), static_cast<int>(rng.uniform() * m));
    Problem p{c, Mask(static_cast<std::size_t>(m), false), [pairs](const Mask& w) {
                for (auto [a, b] : pairs)
                  if (w[static_cast<std::size_t>(a)] && w[static_cast<std::size_t>(b)]) return false;
                return true;
              }};
    const double best = oracle::brute_force_optimum(c, p.fixed, p.feasible);
    const auto r = run_cmawm(p, {25, 20, static_cast<std::uint64_t>(inst), 1});
    ASSERT_TRUE(r.found_feasible);
    EXPECT_TRUE(p.feasible(r.omega));
    EXPECT_NEAR(phi(p, r.omega), r.phi, 1e-12);
    if (std::abs(-r.phi - best) < 1e-12) ++optimal;
  }
  EXPECT_GE(optimal, 18);
}

TEST(RunCmawm, PolishSwapsToTheLightestRemoval) {
  Vec c(6);
  c << 0.30, 0.05, 0.20, 0.15, 0.10, 0.20;
  Problem p{c, Mask(6, false), [](const Mask& w) { return !(w[0] && w[1] && w[2]); }};
  const auto raw = run_cmawm(p, {3, 8, 5, 1, 0});
  EXPECT_EQ(raw.evaluations, 1 + 3 * 8);
  const auto r = run_cmawm(p, {3, 8, 5, 1});
  EXPECT_EQ(r.omega, (Mask{true, false, true, true, true, true}));
  EXPECT_NEAR(r.phi, -0.95, 1e-12);
  EXPECT_LE(r.phi, raw.phi);
  EXPECT_LE(r.evaluations, 1 + 3 * 8 + 40);
}

TEST(RunCmawm, FixedEntriesStayOn) {
  Mask fixed{true, false, true, false};
  Problem p{Vec::Constant(4, 0.25), fixed, [](const Mask& w) { return !w[1]; }};
  const auto r = run_cmawm(p, {10, 20, 9, 1});
  EXPECT_TRUE(r.omega[0] && r.omega[2] && !r.omega[1] && r.omega[3]);
  EXPECT_THROW(phi(p, Mask{false, true, true, true}), ContractViolation);
}

TEST(RunCmawm, ThreadCountDoesNotChangeResult) {
  Rng rng(8);
  Vec c(10);
  for (int j = 0; j < 10; ++j) c[j] = rng.uniform();
  Problem p{c, Mask(10, false), [](const Mask& w) { return !(w[0] && w[3]) && !(w[5] && w[7] && w[9]); }};
  const auto a = run_cmawm(p, {25, 20, 4, 1});
  const auto b = run_cmawm(p, {25, 20, 4, 4});
  EXPECT_EQ(a.omega, b.omega);
  EXPECT_EQ(a.phi, b.phi);
}

TEST(SubsetEvaluator, AgreesWithFreshSurfaces) {
  const Box bounds{v2(0, 0), v2(1, 1)};
  const auto active = ring(0.2, 24, false);
  const constraints::ConstraintSet set({std::make_shared<constraints::PathExists>(bounds, 0.02),
                                        std::make_shared<constraints::NoPenetration>(0.4)});
  const constraints::Context ctx{StateSet::single(v2(0.1, 0.1)), {v2(0.5, 0.5)}};
  const Gpis base = base_surface();
  const SubsetEvaluator eval(set, base, active, ctx);
  Rng rng(12);
  for (int k = 0; k < 40; ++k) {
    Mask keep(active.size());
    for (std::size_t j = 0; j < keep.size(); ++j) keep[j] = rng.uniform() < 0.7;
    keep.back() = true;
    EXPECT_EQ(eval(keep), constraints::h_all(set, base, active, keep, ctx)) << k;
    Vec m1, v1, m2, v2_;
    eval.predict(keep, 1, &m1, &v1);
    std::vector<DataPoint> subset;
    for (std::size_t j = 0; j < keep.size(); ++j)
      if (keep[j]) subset.push_back(active[j]);
    base.with_training(contact::to_training_set(subset, 2)).predict_batch(ctx.state.matrix(), &m2, &v2_);
    EXPECT_NEAR(m1[0], m2[0], 1e-9);
    EXPECT_NEAR(v1[0], v2_[0], 1e-9);
  }
}

TEST(RefineContacts, OpensEncirclingRingWithoutTouchingExterior) {
  const Box bounds{v2(0, 0), v2(1, 1)};
  contact::DatasetPair dp;
  dp.active = ring(0.2, 10, true);
  dp.memory = dp.active;
  const constraints::ConstraintSet set({std::make_shared<constraints::PathExists>(bounds, 0.01)});
  const constraints::Context ctx{StateSet::single(v2(0.1, 0.1)), {v2(0.5, 0.5)}};
  const Gpis base = base_surface();
  ASSERT_FALSE(constraints::h_all(set, base, dp.active, Mask(dp.active.size(), true), ctx));
  const auto out = refine_contacts(dp, set, base, ctx, {25, 20, 3, 1});
  EXPECT_TRUE(out.event.found_feasible);
  EXPECT_GT(out.event.removed, 0u);
  EXPECT_LE(out.event.generations, 25);
  EXPECT_TRUE(constraints::h_all(set, base, out.datasets.active, Mask(out.datasets.active.size(), true), ctx));
  for (const auto& r : out.removed_points) {
    EXPECT_TRUE(r.interior());
    EXPECT_TRUE(r.removable());
  }
  EXPECT_EQ(out.datasets.memory.size(), dp.memory.size());
  EXPECT_EQ(out.datasets.active.size() + out.removed_points.size(), dp.active.size());
  EXPECT_EQ(out.datasets.check_invariants(), "");
}

TEST(RefineContacts, PurgesLocalMinimumData) {
  const Box bounds{v2(0, 0), v2(1, 1)};
  contact::DatasetPair dp;
  dp.active = ring(0.2, 6, false);
  dp.active.push_back({v2(0.9, 0.9), 1.0, Source::Observed, true});
  dp.memory = dp.active;
  const constraints::ConstraintSet set({std::make_shared<constraints::PathExists>(bounds, 0.02)});
  const constraints::Context ctx{StateSet::single(v2(0.1, 0.1)), {v2(0.5, 0.5)}};
  const auto out = refine_contacts(dp, set, base_surface(), ctx, {5, 20, 3, 1});
  EXPECT_EQ(out.event.purged, 1u);
  for (const auto& d : out.datasets.active) EXPECT_FALSE(d.local_min);
  for (const auto& d : out.datasets.memory) EXPECT_FALSE(d.local_min);
}
