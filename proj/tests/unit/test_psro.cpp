#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "reference.hpp"
#include "udiv/psro.hpp"

using namespace udiv;

namespace {

constexpr Eigen::Index kRock = 0, kScissors = 1, kPaper = 2;

RunConfig matrix_config(const MatrixGame& game, Mode mode, int iterations, std::uint64_t seed) {
  RunConfig c;
  c.game.kind = GameKind::Matrix;
  c.game.matrix = game;
  c.mode = mode;
  c.iterations = iterations;
  c.seed = seed;
  if (uses_behavioral(mode)) c.lambda.lambda1 = 0.5;
  if (uses_response(mode)) c.lambda.lambda2 = 0.5;
  return c;
}

RunConfig mixture_config(Mode mode, int iterations, std::uint64_t seed) {
  RunConfig c;
  c.game.kind = GameKind::Mixture;
  c.game.mixture = build_mixture_game();
  c.mode = mode;
  c.iterations = iterations;
  c.seed = seed;
  c.oracle = OracleParams::differential_defaults();
  c.metrics.every = iterations;
  c.metrics.pe_n = 0;
  c.metrics.expl_restarts = 1;
  c.metrics.expl_steps = 20;
  if (uses_behavioral(mode)) c.lambda.lambda1 = 1.0;
  if (uses_response(mode)) c.lambda.lambda2 = 1500.0;
  c.lambda.decay = true;
  return c;
}

bool same_records(const RunLog& a, const RunLog& b) {
  if (a.records.size() != b.records.size()) return false;
  auto eq = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const auto& r = a.records[i];
    const auto& s = b.records[i];
    if (r.iteration != s.iteration || r.pop_size_row != s.pop_size_row ||
        r.pop_size_col != s.pop_size_col || !eq(r.exploitability, s.exploitability) ||
        !eq(r.pe, s.pe) || r.restricted_value != s.restricted_value) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST(RunPsro, ExactOracleCoversRpsSupport) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RunConfig c = matrix_config(build_rps(), Mode::Psro, 3, seed);
    c.matrix_oracle = MatrixOracleKind::Exact;
    const RunLog log = run_psro(c);
    const auto& pop = log.population.matrix[0];
    for (Eigen::Index a : {kRock, kScissors, kPaper}) {
      EXPECT_NE(std::find(pop.begin(), pop.end(), MixedStrategy::pure(3, a)), pop.end())
          << "seed " << seed << " action " << a;
    }
    EXPECT_LT(log.records.back().exploitability, 0.05);
  }
}

TEST(RunPsro, RecordsAndPopulationGrowth) {
  std::mt19937_64 gen(1);
  const MatrixGame g(udiv::testing::random_matrix(4, 5, gen));
  const RunLog log = run_psro(matrix_config(g, Mode::PsroBdRd, 6, 3));
  ASSERT_EQ(log.records.size(), 6u);
  for (std::size_t i = 0; i < log.records.size(); ++i) {
    EXPECT_EQ(log.records[i].iteration, int(i) + 1);
    EXPECT_EQ(log.records[i].pop_size_row, long(i) + 2);
    EXPECT_EQ(log.records[i].pop_size_col, long(i) + 2);
  }
  EXPECT_FALSE(log.population.shared);
  EXPECT_EQ(log.population.matrix[1].size(), 7u);
}

TEST(RunPsro, PeNonDecreasingForEveryMode) {
  const MatrixGame g = gen_synthetic_metagame(20, 1.0, 1.0, 11);
  for (Mode mode : {Mode::SelfPlay, Mode::Psro, Mode::PsroBd, Mode::PsroRd, Mode::PsroBdRd}) {
    const RunLog log = run_psro(matrix_config(g, mode, 10, 4));
    for (std::size_t i = 1; i < log.records.size(); ++i) {
      EXPECT_GE(log.records[i].pe, log.records[i - 1].pe - 1e-2) << to_string(mode);
    }
  }
}

TEST(RunPsro, DeterministicPerSeed) {
  const MatrixGame g = gen_synthetic_metagame(10, 1.0, 1.0, 2);
  const RunConfig c = matrix_config(g, Mode::PsroBdRd, 5, 8);
  EXPECT_TRUE(same_records(run_psro(c), run_psro(c)));
  const RunConfig m = mixture_config(Mode::PsroBdRd, 3, 1);
  const RunLog a = run_psro(m);
  const RunLog b = run_psro(m);
  EXPECT_TRUE(same_records(a, b));
  ASSERT_EQ(a.trajectories.size(), b.trajectories.size());
  for (std::size_t i = 0; i < a.trajectories.size(); ++i) {
    EXPECT_EQ(a.trajectories[i].x, b.trajectories[i].x);
    EXPECT_EQ(a.trajectories[i].y, b.trajectories[i].y);
  }
}

TEST(RunPsro, MixtureTrajectoryRowCount) {
  const RunConfig c = mixture_config(Mode::Psro, 4, 0);
  const RunLog log = run_psro(c);
  EXPECT_EQ(log.trajectories.size(), std::size_t(4 * c.oracle.n_train));
  for (const auto& p : log.trajectories) EXPECT_EQ(p.player, 0);
  EXPECT_TRUE(log.population.shared);
  EXPECT_EQ(log.population.points[0].size(), 5u);
  EXPECT_TRUE(std::isfinite(log.records.back().exploitability));
}

TEST(RunPsro, PlainPsroAddsImprovingResponses) {
  std::mt19937_64 gen(5);
  const MatrixGame g(udiv::testing::random_antisymmetric(6, gen));
  const RunLog log = run_psro(matrix_config(g, Mode::Psro, 8, 2));
  for (std::size_t i = 1; i < log.records.size(); ++i) {
    EXPECT_GE(log.records[i].restricted_value, -0.05);
  }
}

TEST(RunPsro, ModeLambdaConsistency) {
  const MatrixGame rps = build_rps();
  RunConfig c = matrix_config(rps, Mode::Psro, 2, 0);
  c.lambda.lambda1 = 0.1;
  EXPECT_THROW(c.validate(), InvariantError);
  c = matrix_config(rps, Mode::PsroBd, 2, 0);
  c.lambda.lambda2 = 0.1;
  EXPECT_THROW(c.validate(), InvariantError);
  c = matrix_config(rps, Mode::PsroRd, 2, 0);
  c.lambda.lambda1 = 0.1;
  EXPECT_THROW(c.validate(), InvariantError);
  c = matrix_config(rps, Mode::Psro, 0, 0);
  EXPECT_THROW(c.validate(), InvariantError);
  c = matrix_config(rps, Mode::PsroBdRd, 2, 0);
  EXPECT_NO_THROW(c.validate());
  c.matrix_oracle = MatrixOracleKind::Exact;
  EXPECT_THROW(c.validate(), InvariantError);
}

TEST(RunPsro, SelfPlayRunsWithZeroLambda) {
  const RunLog log = run_psro(matrix_config(build_rps(), Mode::SelfPlay, 5, 1));
  ASSERT_EQ(log.records.size(), 5u);
  for (const auto& r : log.records) {
    EXPECT_EQ(r.lambda1, 0.0);
    EXPECT_EQ(r.lambda2, 0.0);
  }
}

TEST(RunPsro, ModeNamesRoundTrip) {
  for (Mode mode : {Mode::SelfPlay, Mode::Psro, Mode::PsroBd, Mode::PsroRd, Mode::PsroBdRd}) {
    EXPECT_EQ(parse_mode(to_string(mode)), mode);
  }
  EXPECT_FALSE(parse_mode("pipeline").has_value());
}

TEST(NashAggregatedProfile, ExampleTable) {
  const MatrixGame rps = build_rps();
  PayoffTable<MixedStrategy> table([&](const MixedStrategy& a, const MixedStrategy& b) {
    return matrix_payoff(rps, a, b);
  });
  for (Eigen::Index a : {kRock, kScissors, kPaper}) table.add_row(MixedStrategy::pure(3, a));
  table.add_col(MixedStrategy::pure(3, kRock));
  const auto [row, col] = nash_aggregated_profile(table);
  EXPECT_NEAR(row[kPaper], 1.0, 1e-2);
  EXPECT_EQ(col, MixedStrategy::pure(3, kRock));
}

TEST(NashAggregatedProfile, SingletonAndSymmetric) {
  const MatrixGame rps = build_rps();
  auto eval = [&](const MixedStrategy& a, const MixedStrategy& b) {
    return matrix_payoff(rps, a, b);
  };
  PayoffTable<MixedStrategy> one(eval);
  one.add_row(MixedStrategy::pure(3, kRock));
  one.add_col(MixedStrategy::uniform(3));
  const auto [r1, c1] = nash_aggregated_profile(one);
  EXPECT_EQ(r1, MixedStrategy::pure(3, kRock));
  EXPECT_EQ(c1, MixedStrategy::uniform(3));

  SymmetricPayoffTable<MixedStrategy> sym(eval, true);
  for (Eigen::Index a : {kRock, kScissors, kPaper}) sym.add(MixedStrategy::pure(3, a));
  const auto [r, c] = nash_aggregated_profile(sym);
  const Vec third = Vec::Constant(3, 1.0 / 3.0);
  EXPECT_LT((r.weights() - third).cwiseAbs().maxCoeff(), 0.03);
  EXPECT_LT((c.weights() - third).cwiseAbs().maxCoeff(), 0.03);
  EXPECT_LT(exploitability_matrix(rps, r, c), 0.05);

  EXPECT_THROW(nash_aggregated_profile(PayoffTable<MixedStrategy>(eval)), InvariantError);
}
