#include <gtest/gtest.h>

#include <cmath>

#include "reference.hpp"
#include "udiv/oracles.hpp"

using namespace udiv;
using udiv::testing::finite_difference;
using udiv::testing::random_distribution;
using udiv::testing::random_matrix;
using udiv::testing::relative_error;

namespace {

constexpr Eigen::Index kRock = 0, kScissors = 1, kPaper = 2;

struct MatrixSetup {
  Mat payoff;
  std::vector<MixedStrategy> own;
  std::vector<MixedStrategy> opp;
  MatrixOracleInput input() const {
    MatrixOracleInput in;
    in.payoff = &payoff;
    in.own_population = own;
    in.own_sigma = own.empty() ? MixedStrategy() : MixedStrategy::uniform(Eigen::Index(own.size()));
    in.opp_population = opp;
    in.opp_sigma = MixedStrategy::uniform(Eigen::Index(opp.size()));
    return in;
  }
};

std::vector<DiffPolicy> points(const MixtureGameSpec& spec, std::vector<Point2> xs) {
  std::vector<DiffPolicy> out;
  for (const auto& x : xs) out.emplace_back(spec, x);
  return out;
}

}  // namespace

TEST(LambdaSchedule, Examples) {
  const LambdaSchedule decay{1.0, 1.0, true};
  const auto [l1, l2] = lambda_at(decay, 25);
  EXPECT_NEAR(l1, 0.65, 1e-15);
  EXPECT_NEAR(l2, 0.65, 1e-15);
  const LambdaSchedule flat{0.2, 0.3, false};
  for (int t : {0, 10, 100}) {
    EXPECT_EQ(lambda_at(flat, t), std::make_pair(0.2, 0.3));
  }
  EXPECT_NEAR(LambdaSchedule::decay_factor(1e6), 0.3, 1e-12);
  for (int t = 0; t < 100; ++t) {
    const double m = LambdaSchedule::decay_factor(t);
    EXPECT_GT(m, 0.3);
    EXPECT_LT(m, 1.0);
    EXPECT_LT(LambdaSchedule::decay_factor(t + 1), m);
  }
  EXPECT_THROW(lambda_at(flat, -1), InvariantError);
}

TEST(AdamStep, FirstStepIsSignedLearningRate) {
  AdamState state(3);
  Vec g(3);
  g << 2.0, -0.5, 1e-3;
  const Vec d = adam_step(state, g, 0.1, 0.9, 0.99, 1e-12);
  EXPECT_NEAR(d[0], 0.1, 1e-9);
  EXPECT_NEAR(d[1], -0.1, 1e-9);
  EXPECT_NEAR(d[2], 0.1, 1e-7);
}

TEST(AdamStep, ZeroGradientLeavesMomentsAtZero) {
  AdamState state(2);
  for (int k = 0; k < 10; ++k) {
    const Vec d = adam_step(state, Vec::Zero(2), 0.1, 0.9, 0.99, 1e-8);
    EXPECT_EQ(d, Vec::Zero(2));
  }
  EXPECT_EQ(state.m, Vec::Zero(2));
  EXPECT_EQ(state.v, Vec::Zero(2));
}

TEST(AdamStep, Deterministic) {
  AdamState a(2), b(2);
  Vec g(2);
  g << 0.3, -0.7;
  for (int k = 0; k < 5; ++k) EXPECT_EQ(adam_step(a, g, 0.1, 0.9, 0.99, 1e-8),
                                        adam_step(b, g, 0.1, 0.9, 0.99, 1e-8));
}

TEST(MatrixOracle, BestRespondsToRock) {
  const MatrixSetup s{build_rps().payoff(), {}, {MixedStrategy::pure(3, kRock)}};
  Rng rng(1);
  MatrixOracleTrace trace;
  const MixedStrategy theta =
      matrix_oracle(s.input(), 0.0, 0.0, OracleParams::matrix_defaults(), rng, &trace);
  EXPECT_EQ(trace.br_qual, kPaper);
  EXPECT_GE(matrix_payoff(build_rps(), theta, MixedStrategy::pure(3, kRock)), 0.9);
}

TEST(MatrixOracle, BehavioralResponsePicksUnplayedStrategy) {
  EXPECT_EQ(behavioral_best_response(MixedStrategy::pure(3, kRock), FDivergenceKind::KL),
            kScissors);
  const MatrixSetup s{build_rps().payoff(),
                      {MixedStrategy::pure(3, kRock)},
                      {MixedStrategy::pure(3, kRock)}};
  Rng rng(2);
  MatrixOracleTrace trace;
  matrix_oracle(s.input(), 1.0, 0.0, OracleParams::matrix_defaults(), rng, &trace);
  EXPECT_EQ(trace.br_occ, kScissors);
}

TEST(MatrixOracle, DeterministicAndOnSimplex) {
  std::mt19937_64 gen(3);
  for (int k = 0; k < 50; ++k) {
    MatrixSetup s{random_matrix(5, 4, gen), {}, {}};
    for (int j = 0; j < 3; ++j) s.own.emplace_back(random_distribution(5, gen));
    for (int j = 0; j < 2; ++j) s.opp.emplace_back(random_distribution(4, gen));
    Rng r1(k), r2(k);
    const MixedStrategy a = matrix_oracle(s.input(), 0.5, 0.5, OracleParams::matrix_defaults(), r1);
    const MixedStrategy b = matrix_oracle(s.input(), 0.5, 0.5, OracleParams::matrix_defaults(), r2);
    EXPECT_EQ(a, b);
    EXPECT_GE(a.weights().minCoeff(), 0.0);
    EXPECT_NEAR(a.weights().sum(), 1.0, 1e-12);
  }
}

TEST(MatrixOracle, WithoutDiversityApproachesBestResponse) {
  std::mt19937_64 gen(4);
  OracleParams params = OracleParams::matrix_defaults();
  params.improvement_threshold = 1e-9;
  for (int k = 0; k < 100; ++k) {
    MatrixSetup s{random_matrix(4, 4, gen), {}, {}};
    s.opp.emplace_back(random_distribution(4, gen));
    Rng rng(k);
    const MixedStrategy theta = matrix_oracle(s.input(), 0.0, 0.0, params, rng);
    const Vec pq = s.payoff * s.opp[0].weights();
    EXPECT_GE(theta.weights().dot(pq), pq.maxCoeff() - 0.05);
  }
}

TEST(MatrixOracle, ExactBestResponse) {
  const MatrixSetup s{build_rps().payoff(), {}, {MixedStrategy::pure(3, kScissors)}};
  EXPECT_EQ(matrix_exact_best_response(s.input()), MixedStrategy::pure(3, kRock));
}

TEST(MatrixOracle, EmptyOpponentsRejected) {
  const MatrixSetup s{build_rps().payoff(), {}, {}};
  MatrixOracleInput in;
  in.payoff = &s.payoff;
  Rng rng(0);
  EXPECT_THROW(matrix_oracle(in, 0.0, 0.0, OracleParams::matrix_defaults(), rng),
               InvariantError);
}

TEST(OracleParams, Validation) {
  OracleParams p = OracleParams::matrix_defaults();
  EXPECT_EQ(p.learning_rate, 0.5);
  EXPECT_EQ(p.improvement_threshold, 0.03);
  p.learning_rate = 1.0;
  EXPECT_THROW(p.validate_matrix(), InvariantError);
  OracleParams d = OracleParams::differential_defaults();
  EXPECT_EQ(d.learning_rate, 0.1);
  EXPECT_EQ(d.n_train, 5);
  EXPECT_EQ(d.adam_beta1, 0.9);
  EXPECT_EQ(d.adam_beta2, 0.99);
  d.n_train = 0;
  EXPECT_THROW(d.validate_differential(), InvariantError);
}

TEST(RandomSimplexPoint, OnSimplex) {
  Rng rng(5);
  for (int k = 0; k < 100; ++k) {
    const MixedStrategy p = random_simplex_point(4, rng);
    EXPECT_GE(p.weights().minCoeff(), 0.0);
    EXPECT_NEAR(p.weights().sum(), 1.0, 1e-12);
  }
}

TEST(DiffOracle, ImprovesPayoffAgainstCenterOpponent) {
  const MixtureGameSpec spec = build_mixture_game();
  const auto opp = points(spec, {spec.centers[0]});
  DiffOracleInput in;
  in.spec = &spec;
  in.opp_population = opp;
  in.opp_sigma = MixedStrategy::uniform(1);
  OracleParams params = OracleParams::differential_defaults();
  params.n_train = 100;
  const Point2 start = spec.centers[0] + Point2(0.1, -0.1);
  const DiffPolicy out = diff_oracle_from(in, start, 0.0, 0.0, params);
  const double before = mixture_payoff(spec, start, spec.centers[0]);
  const double after = mixture_payoff(spec, out.x(), spec.centers[0]);
  EXPECT_GT(after, before);

  double grid_max = -1e9;
  for (int i = 0; i <= 200; ++i) {
    for (int j = 0; j <= 200; ++j) {
      const Point2 x(-7.0 + 14.0 * i / 200, -7.0 + 14.0 * j / 200);
      grid_max = std::max(grid_max, mixture_payoff(spec, x, spec.centers[0]));
    }
  }
  EXPECT_LE(after, grid_max + 1e-2);
}

TEST(DiffOracle, StepCountContract) {
  const MixtureGameSpec spec = build_mixture_game();
  const auto opp = points(spec, {Point2(1.0, 0.0)});
  DiffOracleInput in;
  in.spec = &spec;
  in.opp_population = opp;
  in.opp_sigma = MixedStrategy::uniform(1);
  OracleParams params = OracleParams::differential_defaults();
  params.n_train = 1;
  DiffOracleTrace trace;
  Rng rng(6);
  diff_oracle(in, 0.0, 0.0, params, rng, &trace);
  EXPECT_EQ(trace.steps.size(), 1u);
  params.n_train = 0;
  EXPECT_THROW(diff_oracle(in, 0.0, 0.0, params, rng), InvariantError);
}

TEST(DiffOracle, Deterministic) {
  const MixtureGameSpec spec = build_mixture_game();
  const auto own = points(spec, {Point2(1.0, 1.0), Point2(-2.0, 0.5)});
  const auto opp = points(spec, {Point2(0.0, 3.0), Point2(2.0, -1.0)});
  const Mat meta = Mat::Constant(2, 2, 0.1);
  DiffOracleInput in{&spec, own, MixedStrategy::uniform(2), opp, MixedStrategy::uniform(2), &meta};
  const auto params = OracleParams::differential_defaults();
  Rng r1(7), r2(7);
  EXPECT_EQ(diff_oracle(in, 1.0, 1500.0, params, r1).x(),
            diff_oracle(in, 1.0, 1500.0, params, r2).x());
}

TEST(DiffObjective, GradientMatchesFiniteDifferences) {
  const MixtureGameSpec spec = build_mixture_game();
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (auto normalize : {true, false}) {
    for (int k = 0; k < 100; ++k) {
      std::vector<Point2> own_x, opp_x;
      for (int j = 0; j < 3; ++j) own_x.emplace_back(u(gen), u(gen));
      for (int j = 0; j < 4; ++j) opp_x.emplace_back(u(gen), u(gen));
      const auto own = points(spec, own_x);
      const auto opp = points(spec, opp_x);
      Mat meta(3, 4);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 4; ++j) meta(i, j) = mixture_payoff(spec, own[i], opp[j]);
      DiffOracleInput in{&spec, own, MixedStrategy(random_distribution(3, gen)), opp,
                         MixedStrategy(random_distribution(4, gen)), &meta};
      OracleParams params = OracleParams::differential_defaults();
      params.normalize_embedding = normalize;
      const DiffObjectiveContext ctx(in, params);
      const Point2 x(u(gen), u(gen));
      const Vec fd = finite_difference(
          [&](const Vec& p) { return ctx.evaluate(Point2(p[0], p[1]), 1.0, 3.0).total; }, Vec(x));
      EXPECT_LT(relative_error(Vec(ctx.evaluate(x, 1.0, 3.0).grad), fd), 1e-4);
    }
  }
}

TEST(DiffObjective, ResponseGradientIsOpponentReweighting) {
  const MixtureGameSpec spec = build_mixture_game();
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int k = 0; k < 50; ++k) {
    std::vector<Point2> own_x, opp_x;
    for (int j = 0; j < 2; ++j) own_x.emplace_back(u(gen), u(gen));
    for (int j = 0; j < 3; ++j) opp_x.emplace_back(u(gen), u(gen));
    const auto own = points(spec, own_x);
    const auto opp = points(spec, opp_x);
    const Mat meta = random_matrix(2, 3, gen);
    DiffOracleInput in{&spec, own, MixedStrategy::uniform(2), opp, MixedStrategy::uniform(3),
                       &meta};
    const DiffObjectiveContext ctx(in, OracleParams::differential_defaults());
    const Point2 x(u(gen), u(gen));
    const double lambda2 = 1500.0;
    const DiffObjective obj = ctx.evaluate(x, 0.0, lambda2);
    Point2 expected = Point2::Zero();
    for (int j = 0; j < 3; ++j) {
      expected += lambda2 * obj.response_weights[j] * mixture_payoff_grad(spec, x, opp_x[j]);
    }
    EXPECT_LT((lambda2 * obj.grad_response - expected).norm(),
              1e-10 * std::max(1.0, expected.norm()));
  }
}

TEST(InitialDiffPoint, NearStrongestOwnPolicyOrInDisk) {
  const MixtureGameSpec spec = build_mixture_game();
  Rng rng(10);
  for (int k = 0; k < 100; ++k) {
    EXPECT_LE(initial_diff_point(spec, {}, nullptr, 0.1, rng).norm(), spec.radius);
  }
  const auto own = points(spec, {Point2(3.0, 0.0), Point2(-3.0, 0.0)});
  Vec w(2);
  w << 0.2, 0.8;
  const MixedStrategy sigma(w);
  const Point2 p = initial_diff_point(spec, own, &sigma, 0.1, rng);
  EXPECT_LT((p - Point2(-3.0, 0.0)).norm(), 1.0);
}
