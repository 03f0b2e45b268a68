#include "cogis/control.hpp"
#include "cogis/envs.hpp"

#include <benchmark/benchmark.h>

using namespace cogis;

static void BM_MppiStepPeg(benchmark::State& state) {
  const envs::Scene scene = envs::make_scene("peg_u");
  const auto env = envs::make_env(scene);
  Mat x(2, 30);
  for (int j = 0; j < 30; ++j) {
    x(0, j) = 0.25 + 0.01 * j;
    x(1, j) = 0.30;
  }
  const Gpis surface = Gpis(2, {0.05, 1.0, 1e-4})
                           .with_training(gp::TrainingSet(x, Vec::Constant(30, -1.0)))
                           .with_prior_mean(0.2);
  control::CostModel cost{scene.goals, {0.59, 0.996, 15.88, 11.03, 0.02}, euclidean, &surface, 0};
  control::MppiConfig cfg;
  cfg.lambda = 0.01;
  cfg.samples = static_cast<int>(state.range(0));
  cfg.horizon = 15;
  cfg.sigma = Vec::Constant(2, 0.2 * 0.03 * 0.03);
  cfg.u_min = env->u_min();
  cfg.u_max = env->u_max();
  const control::Dynamics f = [&](const StateSet& s, const Vec& u) { return env->nominal(s, u); };
  std::vector<Vec> nominal(15, Vec::Zero(2));
  for (auto _ : state) {
    const auto r = control::mppi_step(scene.start, nominal, f, cost, cfg, Rng(1));
    benchmark::DoNotOptimize(r.action.data());
  }
}
BENCHMARK(BM_MppiStepPeg)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

static void BM_CableStep(benchmark::State& state) {
  const envs::Scene scene = envs::make_scene("cable_hook");
  auto env = envs::make_env(scene);
  Vec u = Vec::Zero(env->control_dim());
  u[1] = -0.01;
  for (auto _ : state) benchmark::DoNotOptimize(env->nominal(scene.start, u).matrix().data());
}
BENCHMARK(BM_CableStep);
