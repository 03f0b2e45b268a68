#include "cogis/constraints.hpp"
#include "cogis/refine.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace cogis;

namespace {

Vec v2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

std::vector<contact::DataPoint> ring(int points) {
  std::vector<contact::DataPoint> d;
  for (int j = 0; j < points; ++j) {
    const double a = 2.0 * 3.14159265358979 * j / points;
    d.push_back({v2(0.4 + 0.15 * std::cos(a), 0.4 + 0.15 * std::sin(a)), -1.0, contact::Source::Predicted, false});
  }
  d.push_back({v2(0.4, 0.4), 1.0, contact::Source::GoalSeed, false});
  return d;
}

}  // namespace

static void BM_ConnectedComponents(benchmark::State& state) {
  auto g = OccupancyGrid::covering(Box{v2(0, 0), v2(0.8, 0.8)}, 0.01);
  for (std::size_t i = 0; i < g.cells.size(); ++i) g.cells[i] = (i * 2654435761u) % 7 < 3;
  for (auto _ : state) benchmark::DoNotOptimize(constraints::connected_components(g).data());
}
BENCHMARK(BM_ConnectedComponents);

static void BM_SubsetEvaluation(benchmark::State& state) {
  const auto active = ring(static_cast<int>(state.range(0)));
  const constraints::ConstraintSet set({std::make_shared<constraints::PathExists>(Box{v2(0, 0), v2(0.8, 0.8)}, 0.01)});
  const constraints::Context ctx{StateSet::single(v2(0.05, 0.05)), {v2(0.4, 0.4)}};
  const Gpis base = Gpis(2, {0.05, 1.0, 1e-4}).with_prior_mean(0.2);
  const refine::SubsetEvaluator eval(set, base, active, ctx);
  refine::Mask keep(active.size(), true);
  for (std::size_t j = 0; j < keep.size(); j += 3) keep[j] = false;
  keep.back() = true;
  for (auto _ : state) benchmark::DoNotOptimize(eval(keep));
}
BENCHMARK(BM_SubsetEvaluation)->Arg(20)->Arg(80);

static void BM_RefineRing(benchmark::State& state) {
  contact::DatasetPair dp;
  dp.active = ring(static_cast<int>(state.range(0)));
  dp.memory = dp.active;
  const constraints::ConstraintSet set({std::make_shared<constraints::PathExists>(Box{v2(0, 0), v2(0.8, 0.8)}, 0.01)});
  const constraints::Context ctx{StateSet::single(v2(0.05, 0.05)), {v2(0.4, 0.4)}};
  const Gpis base = Gpis(2, {0.05, 1.0, 1e-4}).with_prior_mean(0.2);
  for (auto _ : state) {
    const auto out = refine::refine_contacts(dp, set, base, ctx, {25, 20, 1, 1});
    benchmark::DoNotOptimize(out.event.removed);
  }
}
BENCHMARK(BM_RefineRing)->Arg(24)->Unit(benchmark::kMillisecond);
