#include "udiv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace udiv {

double exploitability_matrix(const MatrixGame& game, const MixedStrategy& pi1,
                             const MixedStrategy& pi2) {
  const Mat& p = game.payoff();
  require_same_size(pi1.size(), p.rows(), "exploitability_matrix row strategy");
  require_same_size(pi2.size(), p.cols(), "exploitability_matrix column strategy");
  const Vec versus_col = p * pi2.weights();
  const Vec versus_row = p.transpose() * pi1.weights();
  const double value = pi1.weights().dot(versus_col);
  const double gain_row = versus_col.maxCoeff() - value;
  const double gain_col = value - versus_row.minCoeff();
  return std::max(0.0, gain_row) + std::max(0.0, gain_col);
}

MatrixGame column_player_game(const MatrixGame& game) {
  return MatrixGame(-game.payoff().transpose());
}

PEResult pe_exact_matrix(const MatrixGame& game,
                         std::span<const MixedStrategy> population,
                         PeSolver solver, int iterations) {
  if (population.empty()) throw InvariantError("PE of an empty population");
  const Mat& p = game.payoff();
  Mat m(static_cast<Eigen::Index>(population.size()), p.cols());
  for (std::size_t k = 0; k < population.size(); ++k) {
    require_same_size(population[k].size(), p.rows(), "PE population member");
    m.row(static_cast<Eigen::Index>(k)) = population[k].weights().transpose() * p;
  }
  const NashResult nash = solver == PeSolver::Exact ? solve_zero_sum(m)
                                                    : fictitious_play(m, iterations);
  PEResult result;
  result.value = nash.value;
  result.alpha = nash.sigma_row;
  result.lower_bound = nash.lower_bound;
  result.upper_bound = nash.upper_bound;
  return result;
}

PeNResult<MixedStrategy> pe_n_matrix(const MatrixGame& game,
                                     std::span<const MixedStrategy> population,
                                     const MatrixAdversaryParams& adversary,
                                     int iterations, std::uint64_t seed,
                                     int meta_iterations) {
  if (adversary.steps < 0) throw InvariantError("adversary steps must be >= 0");
  if (!(adversary.mixing > 0.0 && adversary.mixing < 1.0)) {
    throw InvariantError("adversary mixing rate must lie in (0, 1)");
  }
  const Mat& p = game.payoff();
  const Eigen::Index cols = p.cols();
  PeProblem<MixedStrategy, MixedStrategy> problem;
  problem.evaluate = [&p](const MixedStrategy& own, const MixedStrategy& adv) {
    return own.weights().dot(p * adv.weights());
  };
  problem.initial_adversary = [cols](Rng&) { return MixedStrategy::uniform(cols); };
  problem.train_adversary = [&p, cols, adversary](
                                std::span<const MixedStrategy> pop,
                                const MixedStrategy& alpha,
                                std::span<const MixedStrategy>, const MixedStrategy&,
                                Rng&) {
    const MixedStrategy held = aggregate(pop, alpha);
    const Eigen::Index br = argmin_lowest(p.transpose() * held.weights());
    if (adversary.steps == 0) return MixedStrategy::pure(cols, br);
    Vec theta = MixedStrategy::uniform(cols).weights();
    for (int s = 0; s < adversary.steps; ++s) {
      theta *= adversary.mixing;
      theta[br] += 1.0 - adversary.mixing;
    }
    return MixedStrategy::normalized(theta);
  };
  return pe_n(problem, population, iterations, seed, meta_iterations);
}

PeNResult<DiffPolicy> pe_n_mixture(const MixtureGameSpec& spec,
                                   std::span<const DiffPolicy> population,
                                   int steps, int iterations, std::uint64_t seed,
                                   const OracleParams& params, int meta_iterations) {
  if (steps < 1) throw InvariantError("adversary steps must be >= 1");
  OracleParams adv_params = params;
  adv_params.n_train = steps;
  adv_params.validate_differential();

  PeProblem<DiffPolicy, DiffPolicy> problem;
  problem.evaluate = [&spec](const DiffPolicy& own, const DiffPolicy& adv) {
    return mixture_payoff(spec, own, adv);
  };
  problem.initial_adversary = [&spec](Rng& rng) {
    return DiffPolicy(spec, uniform_disk_point(spec.radius, rng));
  };
  problem.train_adversary = [&spec, adv_params](
                                std::span<const DiffPolicy> pop,
                                const MixedStrategy& alpha,
                                std::span<const DiffPolicy> adversaries,
                                const MixedStrategy& adversary_sigma, Rng& rng) {
    DiffOracleInput input;
    input.spec = &spec;
    input.opp_population = pop;
    input.opp_sigma = alpha;
    const Point2 start = initial_diff_point(spec, adversaries, &adversary_sigma,
                                            adv_params.init_noise, rng);
    return diff_oracle_from(input, start, 0.0, 0.0, adv_params);
  };
  return pe_n(problem, population, iterations, seed, meta_iterations);
}

namespace {

// max_x sum_j w_j phi(x, y_j) by multi-start Adam ascent.
double best_deviation(const MixtureGameSpec& spec, const PolicyMixture<DiffPolicy>& opp,
                      std::span<const DiffPolicy> own_members,
                      const ExploitabilityDiffParams& params) {
  const int kc = spec.num_components();
  const Mat s = spec.cyclic_real();
  Vec opp_mix = Vec::Zero(kc);
  double opp_mass = 0.0;
  for (std::size_t j = 0; j < opp.members.size(); ++j) {
    const double w = opp.weights[static_cast<Eigen::Index>(j)];
    opp_mix += w * opp.members[j].embedding();
    opp_mass += w * opp.members[j].embedding().sum();
  }
  const Vec outer = s * opp_mix + Vec::Constant(kc, opp.weights.weights().sum());
  auto value = [&](const Vec& pi) { return outer.dot(pi) - opp_mass; };

  std::vector<Point2> starts(spec.centers.begin(), spec.centers.end());
  starts.emplace_back(Point2::Zero());
  Rng rng(params.seed);
  for (int r = 0; r < params.restarts; ++r) {
    starts.push_back(uniform_disk_point(spec.radius, rng));
  }
  for (const auto& m : own_members) starts.push_back(m.x());

  double best = -std::numeric_limits<double>::infinity();
  for (const Point2& start : starts) {
    Point2 x = start;
    AdamState adam(2);
    best = std::max(best, value(embed(spec, x)));
    for (int t = 0; t < params.steps; ++t) {
      const Vec grad = embed_jacobian(spec, x).transpose() * outer;
      const Vec delta = adam_step(adam, grad, params.learning_rate, params.adam_beta1,
                                  params.adam_beta2, params.adam_eps);
      x += Point2(delta[0], delta[1]);
      best = std::max(best, value(embed(spec, x)));
    }
  }
  return best;
}

void check_mixture(const PolicyMixture<DiffPolicy>& m) {
  if (m.members.empty()) throw InvariantError("exploitability of an empty mixture");
  require_same_size(static_cast<Eigen::Index>(m.members.size()), m.weights.size(),
                    "mixture weights");
}

}  // namespace

ExploitabilityEstimate exploitability_diff(const MixtureGameSpec& spec,
                                           const PolicyMixture<DiffPolicy>& row,
                                           const PolicyMixture<DiffPolicy>& col,
                                           const ExploitabilityDiffParams& params) {
  if (params.restarts < 1) throw InvariantError("restarts must be >= 1");
  if (params.steps < 0) throw InvariantError("steps must be >= 0");
  check_mixture(row);
  check_mixture(col);
  double value = 0.0;
  for (std::size_t i = 0; i < row.members.size(); ++i) {
    for (std::size_t j = 0; j < col.members.size(); ++j) {
      value += row.weights[static_cast<Eigen::Index>(i)] *
               col.weights[static_cast<Eigen::Index>(j)] *
               mixture_payoff(spec, row.members[i], col.members[j]);
    }
  }
  ExploitabilityEstimate out;
  out.gain_row = std::max(0.0, best_deviation(spec, col, row.members, params) - value);
  out.gain_col = std::max(0.0, best_deviation(spec, row, col.members, params) + value);
  out.total = out.gain_row + out.gain_col;
  return out;
}

ExploitabilityEstimate exploitability_tabular(
    const TabularMG& mg, const PolicyMixture<TabularPolicy>& row,
    const PolicyMixture<TabularPolicy>& col, const TabularOracleParams& params,
    std::uint64_t seed) {
  double value = 0.0;
  for (std::size_t i = 0; i < row.members.size(); ++i) {
    for (std::size_t j = 0; j < col.members.size(); ++j) {
      value += row.weights[static_cast<Eigen::Index>(i)] *
               col.weights[static_cast<Eigen::Index>(j)] *
               player_return(mg, 0, row.members[i], col.members[j]);
    }
  }
  auto deviation = [&](int player, const PolicyMixture<TabularPolicy>& opp) {
    const TabularPolicy br =
        rl_best_response(mg, player, opp.members, opp.weights, Mat(), 0.0, params, seed);
    double total = 0.0;
    for (std::size_t j = 0; j < opp.members.size(); ++j) {
      total += opp.weights[static_cast<Eigen::Index>(j)] *
               player_return(mg, player, br, opp.members[j]);
    }
    return total;
  };
  ExploitabilityEstimate out;
  out.gain_row = std::max(0.0, deviation(0, col) - value);
  out.gain_col = std::max(0.0, deviation(1, row) + value);
  out.total = out.gain_row + out.gain_col;
  return out;
}

}  // namespace udiv
