#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "udiv/games.hpp"
#include "udiv/metagame.hpp"
#include "udiv/oracles.hpp"
#include "udiv/tabular.hpp"
#include "udiv/types.hpp"

namespace udiv {

// Sum over both players of the best pure deviation gain at (pi1, pi2).
double exploitability_matrix(const MatrixGame& game, const MixedStrategy& pi1,
                             const MixedStrategy& pi2);

struct PEResult {
  double value = 0.0;
  MixedStrategy alpha;       // optimal aggregation over the population
  Mat meta_matrix;           // population x adversaries (PE(n) only)
  std::vector<double> values;  // restricted value after each adversary (PE(n) only)
  double lower_bound = 0.0;  // guaranteed by alpha
  double upper_bound = 0.0;  // implied by the adversary mixture
};

enum class PeSolver { Exact, FictitiousPlay };

// max_alpha min_q alpha^T M q with M = Pi^T P (one row per member). The exact
// solver is the simplex method; FictitiousPlay runs `iterations` rounds.
PEResult pe_exact_matrix(const MatrixGame& game,
                         std::span<const MixedStrategy> population,
                         PeSolver solver = PeSolver::Exact,
                         int iterations = kPeSolverIterations);

// Row-player view of the column player: P' = -P^T.
MatrixGame column_player_game(const MatrixGame& game);

// Callbacks defining an adversarial PE(n) run. The population holder is the
// row player of `evaluate`.
template <class Policy, class Adversary>
struct PeProblem {
  std::function<double(const Policy&, const Adversary&)> evaluate;
  std::function<Adversary(Rng&)> initial_adversary;
  // New adversary against the alpha-aggregated population. `adversaries` and
  // `adversary_sigma` describe the current adversary population.
  std::function<Adversary(std::span<const Policy> population,
                          const MixedStrategy& alpha,
                          std::span<const Adversary> adversaries,
                          const MixedStrategy& adversary_sigma, Rng& rng)>
      train_adversary;
};

template <class Adversary>
struct PeNResult : PEResult {
  std::vector<Adversary> adversary_trace;
};

// Grows an adversary population for `iterations` rounds against the fixed
// population and returns the final restricted Nash value (fictitious play,
// `meta_iterations` rounds).
template <class Policy, class Adversary>
PeNResult<Adversary> pe_n(const PeProblem<Policy, Adversary>& problem,
                          std::span<const Policy> population, int iterations,
                          std::uint64_t seed,
                          int meta_iterations = kPeSolverIterations) {
  if (population.empty()) throw InvariantError("PE of an empty population");
  if (iterations < 1) throw InvariantError("PE(n) needs >= 1 iteration");
  Rng rng(seed);
  PayoffTable<Policy, Adversary> table(problem.evaluate);
  for (const auto& p : population) table.add_row(p);
  table.add_col(problem.initial_adversary(rng));

  PeNResult<Adversary> result;
  auto solve = [&] {
    const NashResult nash = fictitious_play(table.entries(), meta_iterations);
    result.values.push_back(nash.value);
    return nash;
  };
  for (int t = 0; t < iterations; ++t) {
    const NashResult nash = solve();
    const auto& adversaries = table.col_policies();
    table.add_col(problem.train_adversary(population, nash.sigma_row,
                                          std::span<const Adversary>(adversaries),
                                          nash.sigma_col, rng));
  }
  const NashResult nash = solve();
  result.values.erase(result.values.begin());
  result.value = nash.value;
  result.alpha = nash.sigma_row;
  result.lower_bound = nash.lower_bound;
  result.upper_bound = nash.upper_bound;
  result.meta_matrix = table.entries();
  result.adversary_trace = table.col_policies();
  return result;
}

// Matrix-game adversary: starts uniform; each new adversary is either the
// exact pure best response (steps == 0) or `steps` mixing steps of rate
// `mixing` from uniform toward it.
struct MatrixAdversaryParams {
  int steps = 0;
  double mixing = 0.5;
};

PeNResult<MixedStrategy> pe_n_matrix(const MatrixGame& game,
                                     std::span<const MixedStrategy> population,
                                     const MatrixAdversaryParams& adversary,
                                     int iterations, std::uint64_t seed,
                                     int meta_iterations = kPeSolverIterations);

// Mixture-game adversary: starts at a uniform point in the radius-r disk; each
// new adversary starts near the adversary with the largest Nash weight and
// runs `steps` Adam steps against the alpha-aggregated population.
PeNResult<DiffPolicy> pe_n_mixture(const MixtureGameSpec& spec,
                                   std::span<const DiffPolicy> population,
                                   int steps, int iterations, std::uint64_t seed,
                                   const OracleParams& params,
                                   int meta_iterations = kPeSolverIterations);

struct ExploitabilityEstimate {
  double total = 0.0;
  double gain_row = 0.0;
  double gain_col = 0.0;
};

struct ExploitabilityDiffParams {
  int restarts = 8;
  int steps = 200;
  std::uint64_t seed = 0;
  double learning_rate = 0.1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.99;
  double adam_eps = 1e-8;
};

// Lower bound on the exploitability of a mixture-game profile. Each deviation
// maximum is approximated by Adam ascent from every Gaussian center, the
// origin, `restarts` seeded random points and the deviating player's own
// members; the best point seen along any path counts.
ExploitabilityEstimate exploitability_diff(const MixtureGameSpec& spec,
                                           const PolicyMixture<DiffPolicy>& row,
                                           const PolicyMixture<DiffPolicy>& col,
                                           const ExploitabilityDiffParams& params);

// Lower bound on the exploitability of a tabular profile, using
// rl_best_response (no intrinsic term) for each player's deviation.
ExploitabilityEstimate exploitability_tabular(
    const TabularMG& mg, const PolicyMixture<TabularPolicy>& row,
    const PolicyMixture<TabularPolicy>& col, const TabularOracleParams& params,
    std::uint64_t seed);

}  // namespace udiv
