#include <benchmark/benchmark.h>

#include <random>

#include "udiv/diversity.hpp"
#include "udiv/metagame.hpp"
#include "udiv/metrics.hpp"
#include "udiv/oracles.hpp"
#include "udiv/tabular.hpp"

using namespace udiv;

namespace {

Mat random_mat(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return Mat::NullaryExpr(rows, cols, [&] { return u(rng); });
}

void BM_FictitiousPlay(benchmark::State& state) {
  const auto n = state.range(0);
  const Mat m = gen_synthetic_metagame(static_cast<int>(n), 1.0, 1.0, 1).payoff();
  for (auto _ : state) benchmark::DoNotOptimize(fictitious_play(m, kMetaSolverIterations));
}
BENCHMARK(BM_FictitiousPlay)->Arg(10)->Arg(30)->Arg(100);

void BM_SolveZeroSum(benchmark::State& state) {
  const Mat m = random_mat(state.range(0), state.range(0), 2);
  for (auto _ : state) benchmark::DoNotOptimize(solve_zero_sum(m));
}
BENCHMARK(BM_SolveZeroSum)->Arg(10)->Arg(30);

void BM_ConvexProjection(benchmark::State& state) {
  const Mat a = random_mat(state.range(0), 30, 3);
  const Vec t = random_mat(30, 1, 4).col(0);
  for (auto _ : state) benchmark::DoNotOptimize(exact_convex_projection(a, t));
}
BENCHMARK(BM_ConvexProjection)->Arg(5)->Arg(20)->Arg(50);

void BM_RdLowerBound(benchmark::State& state) {
  const Mat a = random_mat(state.range(0), 30, 5);
  const Vec t = random_mat(30, 1, 6).col(0);
  const PseudoInverseParts parts = pseudo_inverse_parts(a);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rd_lower_bound(parts, t));
    benchmark::DoNotOptimize(rd_lower_bound_grad(parts, t));
  }
}
BENCHMARK(BM_RdLowerBound)->Arg(5)->Arg(20);

void BM_Occupancy(benchmark::State& state) {
  const int states = static_cast<int>(state.range(0));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  TabularMG mg(states, 3, 3, 0.9, Vec::Constant(states, 1.0 / states));
  for (int s = 0; s < states; ++s) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        Vec p = Vec::NullaryExpr(states, [&] { return u(rng); });
        p /= p.sum();
        for (int t = 0; t < states; ++t) mg.set_transition(s, i, j, t, p[t]);
      }
    }
  }
  const JointPolicy pi{TabularPolicy::uniform(states, 3), TabularPolicy::uniform(states, 3)};
  for (auto _ : state) benchmark::DoNotOptimize(occupancy(mg, pi));
}
BENCHMARK(BM_Occupancy)->Arg(5)->Arg(50);

void BM_DiffOracle(benchmark::State& state) {
  const MixtureGameSpec spec = build_mixture_game();
  std::vector<DiffPolicy> pop;
  for (int k = 0; k < state.range(0); ++k) pop.emplace_back(spec, spec.centers[k % 9]);
  Mat meta(pop.size(), pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i)
    for (std::size_t j = 0; j < pop.size(); ++j) meta(i, j) = mixture_payoff(spec, pop[i], pop[j]);
  const auto n = static_cast<Eigen::Index>(pop.size());
  const DiffOracleInput in{&spec, pop, MixedStrategy::uniform(n), pop, MixedStrategy::uniform(n),
                           &meta};
  const OracleParams params = OracleParams::differential_defaults();
  Rng rng(8);
  for (auto _ : state) benchmark::DoNotOptimize(diff_oracle(in, 1.0, 1500.0, params, rng));
}
BENCHMARK(BM_DiffOracle)->Arg(5)->Arg(30);

}  // namespace

BENCHMARK_MAIN();
