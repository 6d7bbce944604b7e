#include "udiv/psro.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace udiv {

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::SelfPlay: return "selfplay";
    case Mode::Psro: return "psro";
    case Mode::PsroBd: return "psro_bd";
    case Mode::PsroRd: return "psro_rd";
    case Mode::PsroBdRd: return "psro_bd_rd";
  }
  return "psro";
}

std::optional<Mode> parse_mode(std::string_view name) {
  for (Mode m : {Mode::SelfPlay, Mode::Psro, Mode::PsroBd, Mode::PsroRd, Mode::PsroBdRd}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

bool uses_behavioral(Mode mode) { return mode == Mode::PsroBd || mode == Mode::PsroBdRd; }
bool uses_response(Mode mode) { return mode == Mode::PsroRd || mode == Mode::PsroBdRd; }

std::string_view to_string(GameKind kind) {
  switch (kind) {
    case GameKind::Matrix: return "matrix";
    case GameKind::Mixture: return "mixture";
    case GameKind::Tabular: return "tabular";
  }
  return "matrix";
}

bool GameHandle::shared_population() const {
  switch (kind) {
    case GameKind::Matrix: return matrix && matrix->symmetric();
    case GameKind::Mixture: return true;
    case GameKind::Tabular: return false;
  }
  return false;
}

void RunConfig::validate() const {
  if (iterations < 1) throw InvariantError("iterations must be >= 1");
  if (metrics.every < 1) throw InvariantError("metric cadence must be >= 1");
  if (metrics.meta_iterations < 1 || metrics.pe_meta_iterations < 1) {
    throw InvariantError("meta-solver iterations must be >= 1");
  }
  if (metrics.pe_n < 0 || metrics.pe_iterations < 1) {
    throw InvariantError("PE(n) needs n >= 0 and >= 1 iteration");
  }
  switch (game.kind) {
    case GameKind::Matrix:
      if (!game.matrix) throw InvariantError("matrix game missing");
      if (matrix_oracle == MatrixOracleKind::Mixing) oracle.validate_matrix();
      break;
    case GameKind::Mixture:
      if (!game.mixture) throw InvariantError("mixture game missing");
      oracle.validate_differential();
      break;
    case GameKind::Tabular:
      if (!game.tabular) throw InvariantError("tabular game missing");
      break;
  }
  for (int player = 0; player < 2; ++player) {
    const Mode m = mode_for(player);
    if (!uses_behavioral(m) && lambda.lambda1 != 0.0) {
      throw InvariantError("mode " + std::string(to_string(m)) + " requires lambda1 = 0");
    }
    if (!uses_response(m) && lambda.lambda2 != 0.0) {
      throw InvariantError("mode " + std::string(to_string(m)) + " requires lambda2 = 0");
    }
    if (game.kind == GameKind::Matrix && matrix_oracle == MatrixOracleKind::Exact &&
        (uses_behavioral(m) || uses_response(m))) {
      throw InvariantError("the exact matrix oracle has no diversity terms");
    }
  }
}

std::pair<MixedStrategy, MixedStrategy> nash_aggregated_profile(
    const PayoffTable<MixedStrategy>& table, int iterations) {
  if (table.empty()) throw InvariantError("Nash profile of an empty table");
  const NashResult nash = fictitious_play(table.entries(), iterations);
  return {aggregate(table.row_policies(), nash.sigma_row),
          aggregate(table.col_policies(), nash.sigma_col)};
}

std::pair<MixedStrategy, MixedStrategy> nash_aggregated_profile(
    const SymmetricPayoffTable<MixedStrategy>& table, int iterations) {
  if (table.empty()) throw InvariantError("Nash profile of an empty table");
  const NashResult nash = fictitious_play(table.entries(), iterations);
  return {aggregate(table.policies(), nash.sigma_row),
          aggregate(table.policies(), nash.sigma_col)};
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class Clock {
 public:
  explicit Clock(bool enabled)
      : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
  double elapsed_ms() const {
    if (!enabled_) return 0.0;
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                     start_)
        .count();
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point start_;
};

struct Lambdas {
  double lambda1;
  double lambda2;
};

Lambdas effective_lambdas(const RunConfig& config, int player, int t) {
  const auto [l1, l2] = lambda_at(config.lambda, t);
  const Mode m = config.mode_for(player);
  return {uses_behavioral(m) ? l1 : 0.0, uses_response(m) ? l2 : 0.0};
}

bool measure_at(const RunConfig& config, int t) {
  return t % config.metrics.every == 0 || t == config.iterations;
}

template <class Fn>
auto at_iteration(int t, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const RunError&) {
    throw;
  } catch (const std::exception& e) {
    throw RunError(t, e.what());
  }
}

// Opponent pool seen by `mode`: the Nash-weighted population, or only the
// latest policy for self-play.
template <class Policy>
std::pair<std::span<const Policy>, MixedStrategy> opponent_pool(
    Mode mode, const std::vector<Policy>& pop, const MixedStrategy& sigma) {
  if (mode == Mode::SelfPlay) {
    return {std::span<const Policy>(&pop.back(), 1), MixedStrategy::pure(1, 0)};
  }
  return {std::span<const Policy>(pop), sigma};
}

// ---------------------------------------------------------------------------

RunLog run_matrix(const RunConfig& config) {
  const MatrixGame& game = *config.game.matrix;
  const Mat& p = game.payoff();
  const Mat p_col = -p.transpose();
  const bool shared = config.game.shared_population();
  const int meta_iters = config.metrics.meta_iterations;
  Rng rng(config.seed);
  Clock clock(config.record_timing);

  auto evaluator = [&p](const MixedStrategy& a, const MixedStrategy& b) {
    return a.weights().dot(p * b.weights());
  };
  SymmetricPayoffTable<MixedStrategy> sym(evaluator, true);
  PayoffTable<MixedStrategy> asym(evaluator);
  // The exact oracle only ever adds pure strategies, so it starts from one too.
  auto initial = [&](Eigen::Index n) {
    if (config.matrix_oracle == MatrixOracleKind::Exact) {
      return MixedStrategy::pure(
          n, std::uniform_int_distribution<Eigen::Index>(0, n - 1)(rng));
    }
    return random_simplex_point(n, rng);
  };
  if (shared) {
    sym.add(initial(p.rows()));
  } else {
    asym.add_row(initial(p.rows()));
    asym.add_col(initial(p.cols()));
  }
  auto pops = [&]() -> std::array<const std::vector<MixedStrategy>*, 2> {
    if (shared) return {&sym.policies(), &sym.policies()};
    return {&asym.row_policies(), &asym.col_policies()};
  };
  auto entries = [&]() -> const Mat& { return shared ? sym.entries() : asym.entries(); };

  NashResult nash = fictitious_play(entries(), meta_iters);
  RunLog log;
  for (int t = 1; t <= config.iterations; ++t) {
    const auto pop = pops();
    const std::array<MixedStrategy, 2> sigma{nash.sigma_row, nash.sigma_col};
    std::array<MixedStrategy, 2> fresh;
    const int players = shared ? 1 : 2;
    for (int player = 0; player < players; ++player) {
      fresh[player] = at_iteration(t, [&] {
        const Mode mode = config.mode_for(player);
        const Lambdas lam = effective_lambdas(config, player, t);
        const auto [opp, opp_sigma] = opponent_pool(mode, *pop[1 - player], sigma[1 - player]);
        MatrixOracleInput input;
        input.payoff = player == 0 ? &p : &p_col;
        input.own_population = *pop[player];
        input.own_sigma = sigma[player];
        input.opp_population = opp;
        input.opp_sigma = opp_sigma;
        if (config.matrix_oracle == MatrixOracleKind::Exact) {
          return matrix_exact_best_response(input);
        }
        return matrix_oracle(input, lam.lambda1, lam.lambda2, config.oracle, rng);
      });
    }
    at_iteration(t, [&] {
      if (shared) {
        sym.add(fresh[0]);
      } else {
        asym.add_row(fresh[0]);
        asym.add_col(fresh[1]);
      }
    });
    nash = fictitious_play(entries(), meta_iters);

    IterationRecord rec;
    rec.iteration = t;
    const auto now = pops();
    rec.pop_size_row = static_cast<long>(now[0]->size());
    rec.pop_size_col = static_cast<long>(now[1]->size());
    const auto [l1, l2] = lambda_at(config.lambda, t);
    rec.lambda1 = l1;
    rec.lambda2 = l2;
    rec.restricted_value = nash.value;
    rec.exploitability = kNaN;
    rec.pe = kNaN;
    if (measure_at(config, t)) {
      const MixedStrategy row = aggregate(*now[0], nash.sigma_row);
      const MixedStrategy col = aggregate(*now[1], nash.sigma_col);
      rec.exploitability = exploitability_matrix(game, row, col);
      rec.pe = pe_exact_matrix(game, *now[0]).value;
    }
    rec.elapsed_ms = clock.elapsed_ms();
    log.records.push_back(rec);
  }

  auto& fp = log.population;
  fp.kind = GameKind::Matrix;
  fp.shared = shared;
  const auto now = pops();
  fp.matrix[0] = *now[0];
  if (!shared) fp.matrix[1] = *now[1];
  fp.nash = {nash.sigma_row, nash.sigma_col};
  fp.meta = entries();
  return log;
}

// ---------------------------------------------------------------------------

RunLog run_mixture(const RunConfig& config) {
  const MixtureGameSpec& spec = *config.game.mixture;
  const int meta_iters = config.metrics.meta_iterations;
  Rng rng(config.seed);
  Clock clock(config.record_timing);

  SymmetricPayoffTable<DiffPolicy> table(
      [&spec](const DiffPolicy& a, const DiffPolicy& b) {
        return mixture_payoff(spec, a, b);
      },
      true);
  table.add(DiffPolicy(spec, uniform_disk_point(spec.radius, rng)));
  NashResult nash = fictitious_play(table.entries(), meta_iters);

  RunLog log;
  for (int t = 1; t <= config.iterations; ++t) {
    const Mode mode = config.mode;
    const Lambdas lam = effective_lambdas(config, 0, t);
    DiffOracleTrace trace;
    const DiffPolicy fresh = at_iteration(t, [&] {
      const auto& pop = table.policies();
      const auto [opp, opp_sigma] = opponent_pool(mode, pop, nash.sigma_col);
      DiffOracleInput input;
      input.spec = &spec;
      input.own_population = pop;
      input.own_sigma = nash.sigma_row;
      input.opp_population = opp;
      input.opp_sigma = opp_sigma;
      input.meta = mode == Mode::SelfPlay ? nullptr : &table.entries();
      return diff_oracle(input, lam.lambda1, lam.lambda2, config.oracle, rng, &trace);
    });
    for (std::size_t s = 0; s < trace.steps.size(); ++s) {
      log.trajectories.push_back(
          {t, 0, static_cast<int>(s), trace.steps[s].x(), trace.steps[s].y()});
    }
    at_iteration(t, [&] { table.add(fresh); });
    nash = fictitious_play(table.entries(), meta_iters);

    IterationRecord rec;
    rec.iteration = t;
    rec.pop_size_row = rec.pop_size_col = static_cast<long>(table.size());
    const auto [l1, l2] = lambda_at(config.lambda, t);
    rec.lambda1 = l1;
    rec.lambda2 = l2;
    rec.restricted_value = nash.value;
    rec.exploitability = kNaN;
    rec.pe = kNaN;
    if (measure_at(config, t)) {
      at_iteration(t, [&] {
        ExploitabilityDiffParams ep;
        ep.restarts = config.metrics.expl_restarts;
        ep.steps = config.metrics.expl_steps;
        ep.seed = config.seed;
        ep.learning_rate = config.oracle.learning_rate;
        ep.adam_beta1 = config.oracle.adam_beta1;
        ep.adam_beta2 = config.oracle.adam_beta2;
        ep.adam_eps = config.oracle.adam_eps;
        const PolicyMixture<DiffPolicy> row{table.policies(), nash.sigma_row};
        const PolicyMixture<DiffPolicy> col{table.policies(), nash.sigma_col};
        rec.exploitability = exploitability_diff(spec, row, col, ep).total;
        if (config.metrics.pe_n > 0) {
          rec.pe = pe_n_mixture(spec, table.policies(), config.metrics.pe_n,
                                config.metrics.pe_iterations, config.seed, config.oracle,
                                config.metrics.pe_meta_iterations)
                       .value;
        }
      });
    }
    rec.elapsed_ms = clock.elapsed_ms();
    log.records.push_back(rec);
  }

  auto& fp = log.population;
  fp.kind = GameKind::Mixture;
  fp.shared = true;
  for (const auto& policy : table.policies()) fp.points[0].push_back(policy.x());
  fp.nash = {nash.sigma_row, nash.sigma_col};
  fp.meta = table.entries();
  return log;
}

// ---------------------------------------------------------------------------

TabularPolicy random_tabular_policy(int states, int actions, Rng& rng) {
  TabularPolicy pi{Mat(states, actions)};
  for (int s = 0; s < states; ++s) {
    pi.probs.row(s) = random_simplex_point(actions, rng).weights().transpose();
  }
  return pi;
}

RunLog run_tabular(const RunConfig& config) {
  const TabularMG& mg = *config.game.tabular;
  const int meta_iters = config.metrics.meta_iterations;
  Rng rng(config.seed);
  Clock clock(config.record_timing);

  PayoffTable<TabularPolicy> table([&mg](const TabularPolicy& a, const TabularPolicy& b) {
    return player_return(mg, 0, a, b);
  });
  table.add_row(random_tabular_policy(mg.num_states(), mg.num_actions(0), rng));
  table.add_col(random_tabular_policy(mg.num_states(), mg.num_actions(1), rng));
  NashResult nash = fictitious_play(table.entries(), meta_iters);

  RunLog log;
  for (int t = 1; t <= config.iterations; ++t) {
    const std::array<const std::vector<TabularPolicy>*, 2> pop{&table.row_policies(),
                                                               &table.col_policies()};
    const std::array<MixedStrategy, 2> sigma{nash.sigma_row, nash.sigma_col};
    const std::array<Mat, 2> meta{table.entries(), -table.entries().transpose()};
    std::array<TabularPolicy, 2> fresh;
    for (int player = 0; player < 2; ++player) {
      const std::uint64_t oracle_seed = rng();
      fresh[player] = at_iteration(t, [&] {
        const Mode mode = config.mode_for(player);
        const Lambdas lam = effective_lambdas(config, player, t);
        const auto [opp, opp_sigma] = opponent_pool(mode, *pop[1 - player], sigma[1 - player]);
        TabularResponseInput input;
        input.mg = &mg;
        input.player = player;
        input.own_population = *pop[player];
        input.own_sigma = sigma[player];
        input.opp_population = opp;
        input.opp_sigma = opp_sigma;
        input.meta = mode == Mode::SelfPlay ? nullptr : &meta[player];
        return tabular_unified_response(input, lam.lambda1, lam.lambda2, config.tabular,
                                        oracle_seed);
      });
    }
    at_iteration(t, [&] {
      table.add_row(fresh[0]);
      table.add_col(fresh[1]);
    });
    nash = fictitious_play(table.entries(), meta_iters);

    IterationRecord rec;
    rec.iteration = t;
    rec.pop_size_row = static_cast<long>(table.num_rows());
    rec.pop_size_col = static_cast<long>(table.num_cols());
    const auto [l1, l2] = lambda_at(config.lambda, t);
    rec.lambda1 = l1;
    rec.lambda2 = l2;
    rec.restricted_value = nash.value;
    rec.exploitability = kNaN;
    rec.pe = kNaN;
    if (measure_at(config, t)) {
      at_iteration(t, [&] {
        const PolicyMixture<TabularPolicy> row{table.row_policies(), nash.sigma_row};
        const PolicyMixture<TabularPolicy> col{table.col_policies(), nash.sigma_col};
        rec.exploitability =
            exploitability_tabular(mg, row, col, config.tabular, config.seed).total;
      });
    }
    rec.elapsed_ms = clock.elapsed_ms();
    log.records.push_back(rec);
  }

  auto& fp = log.population;
  fp.kind = GameKind::Tabular;
  fp.tabular[0] = table.row_policies();
  fp.tabular[1] = table.col_policies();
  fp.nash = {nash.sigma_row, nash.sigma_col};
  fp.meta = table.entries();
  return log;
}

}  // namespace

RunLog run_psro(const RunConfig& config) {
  config.validate();
  switch (config.game.kind) {
    case GameKind::Matrix: return run_matrix(config);
    case GameKind::Mixture: return run_mixture(config);
    case GameKind::Tabular: return run_tabular(config);
  }
  throw InvariantError("unknown game kind");
}

}  // namespace udiv
