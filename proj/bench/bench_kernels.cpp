// Parallel kernels against their serial references.
//   ./bench_kernels --benchmark_filter=Gp

#include <benchmark/benchmark.h>

#include <random>

#include "sapt/arm.hpp"
#include "sapt/baselines.hpp"
#include "sapt/evolve.hpp"
#include "sapt/gp.hpp"
#include "sapt/lander.hpp"

using namespace sapt;

namespace {

std::vector<std::vector<double>> random_policies(const Environment& env, int n) {
    Rng rng(1);
    std::vector<std::vector<double>> out;
    for (int i = 0; i < n; ++i) out.push_back(random_policy(env.policy_bounds(), rng));
    return out;
}

std::vector<std::vector<double>> unit_points(std::size_t d, int n, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::vector<double>> out(static_cast<std::size_t>(n), std::vector<double>(d));
    for (auto& x : out)
        for (auto& v : x) v = u(rng);
    return out;
}

GPModel model(std::size_t d, int n_obs) {
    std::vector<Observation> obs;
    for (const auto& x : unit_points(d, n_obs, 2)) obs.push_back({x, x[0]});
    return GPModel(constant_prior(0.0), GPHyper{std::vector<double>(d, 0.2), 1.0, 1e-2}, obs);
}

template <bool Parallel>
void BM_EvaluateBatchArm(benchmark::State& state) {
    const ArmEnv env;
    const auto policies = random_policies(env, static_cast<int>(state.range(0)));
    Rng rng(3);
    const auto conds = sample_dynamics(env.dynamics_bounds(), 5, rng);
    for (auto _ : state) {
        auto r = Parallel ? evaluate_batch(env, policies, conds) : evaluate_batch_serial(env, policies, conds);
        benchmark::DoNotOptimize(r);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_GpPredictBatch(benchmark::State& state) {
    const GPModel gp = model(2, 20);
    const auto xs = unit_points(2, static_cast<int>(state.range(0)), 4);
    for (auto _ : state) {
        auto r = Parallel ? gp.predict_batch(xs) : gp.predict_batch_serial(xs);
        benchmark::DoNotOptimize(r);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_CboScores(benchmark::State& state) {
    const GPModel r = model(ArmPolicy::kNumParams, 20);
    const GPModel c = model(ArmPolicy::kNumParams, 20);
    const auto xs = unit_points(ArmPolicy::kNumParams, static_cast<int>(state.range(0)), 5);
    for (auto _ : state) {
        auto s = Parallel ? cbo_scores(r, c, xs, 0.5, 0.01) : cbo_scores_serial(r, c, xs, 0.5, 0.01);
        benchmark::DoNotOptimize(s);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_EvaluateBatchArm<false>)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EvaluateBatchArm<true>)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GpPredictBatch<false>)->Arg(900)->Arg(10000);
BENCHMARK(BM_GpPredictBatch<true>)->Arg(900)->Arg(10000);
BENCHMARK(BM_CboScores<false>)->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CboScores<true>)->Arg(4096)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
