// Microbenchmarks for the hot paths: loss evaluation/gradients, the inner
// maximization oracles, and full optimizer steps at the desk-scale sizes the
// experiment harness uses.

#include <benchmark/benchmark.h>

#include "samlab/losses.hpp"
#include "samlab/optimizers.hpp"
#include "samlab/perturbation.hpp"
#include "samlab/risk.hpp"

using namespace samlab;

namespace {

struct Fixture {
  LossHandle loss;
  Dataset data;
  DenseVector w;
  Sample z;
};

Fixture make_fixture(LossKind kind) {
  Fixture f;
  switch (kind) {
    case LossKind::FlatSphereA:
      f.loss = make_loss(LossKind::FlatSphereA, 8, 1, 0.25);
      break;
    case LossKind::BlockHingeB:
      f.loss = make_loss(LossKind::BlockHingeB, 4, 16, 0.0, 0.25, 1.0);
      break;
    case LossKind::ChainAmplifierC:
      f.loss = make_loss(LossKind::ChainAmplifierC, 6, 8, 0.0, 0.1, 1.7677);
      break;
    default:
      f.loss = make_loss(LossKind::ScalarHingeD, 1, 1, 0.25);
      break;
  }
  f.data = sample_dataset(f.loss.alphabet(), f.loss.sample_bits(), 8, RngStream(17));
  RngStream rng(29);
  f.w = random_in_ball(f.loss.dim, 1.0, rng);
  f.z = f.data.samples.front();
  return f;
}

void BM_EvalLossA(benchmark::State& state) {
  const Fixture f = make_fixture(LossKind::FlatSphereA);
  for (auto _ : state) benchmark::DoNotOptimize(eval_loss(f.loss, f.w, f.z));
}
BENCHMARK(BM_EvalLossA);

void BM_EvalLossC(benchmark::State& state) {
  const Fixture f = make_fixture(LossKind::ChainAmplifierC);
  for (auto _ : state) benchmark::DoNotOptimize(eval_loss(f.loss, f.w, f.z));
}
BENCHMARK(BM_EvalLossC);

void BM_GradEmpiricalA(benchmark::State& state) {
  const Fixture f = make_fixture(LossKind::FlatSphereA);
  for (auto _ : state) benchmark::DoNotOptimize(grad_empirical(f.loss, f.w, f.data));
}
BENCHMARK(BM_GradEmpiricalA);

void BM_ExactArgmaxB(benchmark::State& state) {
  const Fixture f = make_fixture(LossKind::BlockHingeB);
  const DenseVector origin = DenseVector::Zero(f.loss.dim);
  for (auto _ : state) {
    TiePolicy policy;
    benchmark::DoNotOptimize(exact_argmax(f.loss, f.data, origin, 1.0, policy));
  }
}
BENCHMARK(BM_ExactArgmaxB);

void BM_AscentArgmaxA(benchmark::State& state) {
  const Fixture f = make_fixture(LossKind::FlatSphereA);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        ascent_argmax(f.loss, f.data, f.w, 0.5, 40, 0.0, 4, RngStream(5)));
  }
}
BENCHMARK(BM_AscentArgmaxA);

void BM_SamStepC(benchmark::State& state) {
  const Fixture f = make_fixture(LossKind::ChainAmplifierC);
  OptimizerConfig cfg;
  cfg.algo = Algo::SAM;
  cfg.eta = 0.1;
  cfg.radius_r = 1.7677;
  cfg.steps_T = 1;
  cfg.zero_grad_eps = 0.0;
  for (auto _ : state) benchmark::DoNotOptimize(run_sam(f.loss, f.data, cfg));
}
BENCHMARK(BM_SamStepC);

void BM_PopulationMcC(benchmark::State& state) {
  const Fixture f = make_fixture(LossKind::ChainAmplifierC);
  for (auto _ : state) {
    benchmark::DoNotOptimize(population_risk_mc(f.loss, f.w, 1000, RngStream(3)));
  }
}
BENCHMARK(BM_PopulationMcC);

}  // namespace

BENCHMARK_MAIN();
