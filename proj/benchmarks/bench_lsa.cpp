#include <benchmark/benchmark.h>

#include "lsa/bounds.hpp"
#include "lsa/chains.hpp"
#include "lsa/estimators.hpp"
#include "lsa/recursion.hpp"
#include "lsa/spectral.hpp"

namespace {

lsa::Instance instance(int d, bool markov) {
  lsa::GeneratorParams gp;
  gp.markov = markov;
  return lsa::make_instance(
      lsa::generate_instance(lsa::GeneratorKind::RandomHurwitz, d, 8, 3, gp));
}

void BM_RunLsa(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const long n = 1 << 14;
  const auto inst = instance(d, false);
  const auto s = lsa::iid_stability_constants(inst.derived.Abar, inst.derived.b_A);
  const auto path = lsa::sample_path(inst.model.noise, n, 1);
  const lsa::Vector theta0 = lsa::Vector::Zero(d);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lsa::run_lsa(inst, s.alpha_q_inf(2.0), n, theta0, path));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_RunLsa)->Arg(1)->Arg(4)->Arg(16);

void BM_Decomposition(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const long n = 1 << 12;
  const auto inst = instance(d, true);
  const auto s = lsa::iid_stability_constants(inst.derived.Abar, inst.derived.b_A);
  const auto path = lsa::sample_path(inst.model.noise, n, 1);
  const lsa::Vector theta0 = lsa::Vector::Zero(d);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        lsa::run_decomposition(inst, s.alpha_q_inf(2.0), n, theta0, path));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_Decomposition)->Arg(1)->Arg(4)->Arg(16);

void BM_Lyapunov(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto inst = instance(d, false);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lsa::solve_lyapunov(inst.derived.Abar));
  }
}
BENCHMARK(BM_Lyapunov)->Arg(2)->Arg(8)->Arg(20);

void BM_Ensemble(benchmark::State& state) {
  const auto inst = instance(2, false);
  const auto s = lsa::iid_stability_constants(inst.derived.Abar, inst.derived.b_A);
  const lsa::Vector theta0 = lsa::Vector::Zero(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lsa::run_ensemble(inst, s.alpha_q_inf(2.0), {1024}, {2.0},
                                               state.range(0), 0, {lsa::Quantity::PrErr},
                                               theta0));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 1024);
}
BENCHMARK(BM_Ensemble)->Arg(100)->Arg(1000);

void BM_ExactMeanDynamics(benchmark::State& state) {
  const auto inst = instance(3, true);
  const auto s = lsa::iid_stability_constants(inst.derived.Abar, inst.derived.b_A);
  const lsa::Vector theta0 = lsa::Vector::Zero(3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        lsa::exact_mean_dynamics(inst, 0.1 * s.alpha_q_inf(2.0), state.range(0), theta0));
  }
}
BENCHMARK(BM_ExactMeanDynamics)->Arg(1 << 10)->Arg(1 << 14);

}  // namespace

BENCHMARK_MAIN();
