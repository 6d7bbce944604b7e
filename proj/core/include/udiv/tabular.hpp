#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <span>
#include <vector>

#include "udiv/diversity.hpp"
#include "udiv/metagame.hpp"
#include "udiv/types.hpp"

namespace udiv {

// Two-player zero-sum Markov game with dense tensors. Player 1 receives
// r(s, a1, a2), player 2 its negation.
class TabularMG {
 public:
  static constexpr long kMaxStateActions = 10000;

  TabularMG(int num_states, int actions1, int actions2, double gamma, Vec eta);

  int num_states() const { return num_states_; }
  int num_actions(int player) const { return actions_[player]; }
  int joint_actions() const { return actions_[0] * actions_[1]; }
  int joint_index(int a1, int a2) const { return a1 * actions_[1] + a2; }
  double gamma() const { return gamma_; }
  const Vec& eta() const { return eta_; }

  double transition(int s, int a1, int a2, int next) const {
    return transition_[index(s, a1, a2) * num_states_ + next];
  }
  void set_transition(int s, int a1, int a2, int next, double p) {
    transition_[index(s, a1, a2) * num_states_ + next] = p;
  }
  double reward(int s, int a1, int a2) const { return reward_[index(s, a1, a2)]; }
  void set_reward(int s, int a1, int a2, double r) { reward_[index(s, a1, a2)] = r; }

  // Rows of P sum to one (1e-12), eta is a distribution, gamma in [0, 1).
  void validate() const;

 private:
  std::size_t index(int s, int a1, int a2) const {
    return (static_cast<std::size_t>(s) * actions_[0] + a1) * actions_[1] + a2;
  }

  int num_states_;
  std::array<int, 2> actions_;
  double gamma_;
  Vec eta_;
  std::vector<double> transition_;
  std::vector<double> reward_;
};

// Structured text format, see docs/formats.md.
TabularMG parse_tabular_mg(std::istream& in);
TabularMG load_tabular_mg(const std::filesystem::path& path);

// A one-state game with self-loop that replays `payoff` every step.
TabularMG single_state_game(const Mat& payoff, double gamma);

// pi_i(a_i | s), one row per state.
struct TabularPolicy {
  Mat probs;

  static TabularPolicy uniform(int num_states, int num_actions);
  int num_states() const { return static_cast<int>(probs.rows()); }
  int num_actions() const { return static_cast<int>(probs.cols()); }
};

// Product of the two players' conditionals.
struct JointPolicy {
  TabularPolicy row;
  TabularPolicy col;
};

// pi(a | s) over joint actions; not necessarily a product.
struct ConditionalPolicy {
  Mat probs;  // S x (A1 * A2)
};

ConditionalPolicy to_conditional(const TabularMG& mg, const JointPolicy& pi);

struct OccupancyMeasure {
  Mat rho;  // S x (A1 * A2), sums to one

  Vec state_marginal() const { return rho.rowwise().sum(); }
  Vec flat() const { return rho.reshaped<Eigen::RowMajor>(); }
};

// rho(s) = (1 - gamma) (I - gamma P_pi^T)^{-1} eta, rho(s, a) = rho(s) pi(a|s).
OccupancyMeasure occupancy(const TabularMG& mg, const ConditionalPolicy& pi);
OccupancyMeasure occupancy(const TabularMG& mg, const JointPolicy& pi);
// Same with an explicit initial distribution.
OccupancyMeasure occupancy(const TabularMG& mg, const ConditionalPolicy& pi,
                           const Vec& eta);

// pi(a|s) = rho(s, a) / sum_a' rho(s, a'); uniform where the state has no mass.
ConditionalPolicy policy_from_occupancy(const OccupancyMeasure& rho);

OccupancyMeasure mixture_occupancy(const TabularMG& mg,
                                   std::span<const TabularPolicy> row_pop,
                                   std::span<const TabularPolicy> col_pop,
                                   const MixedStrategy& sigma_row,
                                   const MixedStrategy& sigma_col);

double occupancy_divergence(FDivergenceKind kind, const OccupancyMeasure& rho1,
                            const OccupancyMeasure& rho2);

enum class IntrinsicMode { PredictionError, NegLogOccupancy };

inline constexpr double kOccupancyFloor = 1e-8;

// Novelty reward over (s, joint a), same layout as OccupancyMeasure::rho.
Mat intrinsic_reward(const OccupancyMeasure& target, IntrinsicMode mode,
                     int feature_dim, std::uint64_t seed);

// Expected discounted return of player 1: sum rho(s,a) r(s,a) / (1 - gamma).
double expected_return(const TabularMG& mg, const JointPolicy& pi);
double expected_return(const TabularMG& mg, const ConditionalPolicy& pi);

// Return for `player` (0 = row, 1 = column).
double player_return(const TabularMG& mg, int player, const TabularPolicy& own,
                     const TabularPolicy& opp);

struct TabularOracleParams {
  int steps = 300;            // gradient steps against the fixed opponents
  int rd_steps = 100;         // steps against the reweighted opponent mixture
  double learning_rate = 0.1;
  double init_scale = 0.01;   // std of the initial logits
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.99;
  double adam_eps = 1e-8;
  IntrinsicMode intrinsic = IntrinsicMode::PredictionError;
  int feature_dim = 8;
};

// Softmax policy-gradient ascent (exact gradients from occupancy measures) on
//   sum_j w_j J_j(theta),  J_j = return of r_player + lambda1 * r_int vs opp_j.
// `r_int` may be empty (no intrinsic term).
TabularPolicy rl_best_response(const TabularMG& mg, int player,
                               std::span<const TabularPolicy> opponents,
                               const MixedStrategy& opp_weights, const Mat& r_int,
                               double lambda1, const TabularOracleParams& params,
                               std::uint64_t seed);

// Value and logit-gradient of the augmented return against one opponent.
struct ReturnGradient {
  double value = 0.0;
  Mat grad;  // S x A_player
};
ReturnGradient return_gradient(const TabularMG& mg, int player,
                               const Mat& logits, const TabularPolicy& opp,
                               const Mat& r_int, double lambda1);

TabularPolicy softmax_policy(const Mat& logits);

struct TabularResponseInput {
  const TabularMG* mg = nullptr;
  int player = 0;
  std::span<const TabularPolicy> own_population;
  MixedStrategy own_sigma;
  std::span<const TabularPolicy> opp_population;
  MixedStrategy opp_sigma;
  const Mat* meta = nullptr;  // own rows x opponent columns, player's payoffs
};

// Full diverse response: intrinsic reward from the Nash-mixture occupancy,
// training against the fixed opponents, then against opponents sampled in
// proportion to |sigma + lambda2 dF/da| with the sign choosing ascent or
// descent.
TabularPolicy tabular_unified_response(const TabularResponseInput& input,
                                       double lambda1, double lambda2,
                                       const TabularOracleParams& params,
                                       std::uint64_t seed);

}  // namespace udiv
