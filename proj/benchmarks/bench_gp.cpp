#include "cogis/gp.hpp"
#include "cogis/gpis.hpp"
#include "cogis/rng.hpp"

#include <benchmark/benchmark.h>

using namespace cogis;

namespace {

gp::TrainingSet random_set(Eigen::Index m, std::uint64_t seed) {
  Rng rng(seed);
  Mat x(2, m);
  Vec y(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    x(0, j) = rng.uniform();
    x(1, j) = rng.uniform();
    y[j] = rng.uniform(-1.0, 1.0);
  }
  return {x, y};
}

}  // namespace

static void BM_PosteriorFactor(benchmark::State& state) {
  const auto train = random_set(state.range(0), 1);
  for (auto _ : state) {
    gp::Posterior post(train, {});
    benchmark::DoNotOptimize(post.weights().data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PosteriorFactor)->RangeMultiplier(2)->Range(16, 512)->Complexity();

static void BM_PredictMeans(benchmark::State& state) {
  const gp::Posterior post(random_set(200, 2), {});
  const Mat q = random_set(state.range(0), 3).points;
  Vec means;
  for (auto _ : state) {
    post.predict(q, &means, nullptr);
    benchmark::DoNotOptimize(means.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PredictMeans)->Arg(1000)->Arg(7500);

static void BM_PredictWithVariance(benchmark::State& state) {
  const gp::Posterior post(random_set(200, 2), {});
  const Mat q = random_set(state.range(0), 3).points;
  Vec means, vars;
  for (auto _ : state) {
    post.predict(q, &means, &vars);
    benchmark::DoNotOptimize(vars.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PredictWithVariance)->Arg(1000)->Arg(7500);

static void BM_LmlGradient(benchmark::State& state) {
  const auto train = random_set(state.range(0), 4);
  for (auto _ : state) benchmark::DoNotOptimize(gp::log_marginal_likelihood(train, {}).value);
}
BENCHMARK(BM_LmlGradient)->Arg(50)->Arg(200);

static void BM_OccupancyGrid(benchmark::State& state) {
  const Gpis s = Gpis(2).with_training(random_set(150, 5)).with_prior_mean(0.2);
  Box b{Vec::Zero(2), Vec::Ones(2)};
  for (auto _ : state) benchmark::DoNotOptimize(s.occupancy_grid(b, 0.01).cells.data());
}
BENCHMARK(BM_OccupancyGrid);
