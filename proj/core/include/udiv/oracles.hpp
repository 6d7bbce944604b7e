#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "udiv/diversity.hpp"
#include "udiv/games.hpp"
#include "udiv/metagame.hpp"
#include "udiv/types.hpp"

namespace udiv {

using Rng = std::mt19937_64;

struct OracleParams {
  double learning_rate = 0.5;           // mu for the matrix oracle, Adam lr otherwise
  double improvement_threshold = 0.03;
  int n_train = 5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.99;
  double adam_eps = 1e-8;
  int max_inner_loops = 1000;
  FDivergenceKind divergence = FDivergenceKind::KL;
  // Differential oracle: normalize the Gaussian embeddings before taking the
  // behavioral divergence (floored at kEmbeddingFloor).
  bool normalize_embedding = true;
  double init_noise = 0.1;

  static OracleParams matrix_defaults();
  static OracleParams differential_defaults();
  void validate_matrix() const;
  void validate_differential() const;
};

inline constexpr double kEmbeddingFloor = 1e-12;

// Sigmoid decay of the diversity weights: m(t) = 1 - 0.7 / (1 + e^{-0.25 (t - 25)}).
struct LambdaSchedule {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  bool decay = false;

  static double decay_factor(double t);
};

std::pair<double, double> lambda_at(const LambdaSchedule& schedule, int t);

// ---------------------------------------------------------------------------

struct AdamState {
  Vec m;
  Vec v;
  int t = 0;

  explicit AdamState(Eigen::Index dim = 0)
      : m(Vec::Zero(dim)), v(Vec::Zero(dim)) {}
};

// One bias-corrected Adam update in the ascent direction. Returns the step to
// add to the parameters.
Vec adam_step(AdamState& state, const Vec& gradient, double lr, double beta1,
              double beta2, double eps);

// ---------------------------------------------------------------------------
// Matrix games.

// Inputs for one diversity-regularized best response in a matrix game, from
// the perspective of the player being trained. `payoff` has the trainee's pure
// strategies as rows and the opponent's pure strategies as columns.
struct MatrixOracleInput {
  const Mat* payoff = nullptr;
  std::span<const MixedStrategy> own_population;
  MixedStrategy own_sigma;
  std::span<const MixedStrategy> opp_population;
  MixedStrategy opp_sigma;
};

struct MatrixOracleTrace {
  int inner_loops = 0;
  Eigen::Index br_qual = 0;
  Eigen::Index br_occ = 0;
  Eigen::Index br_final = 0;  // BR_rew or BR_qual used in the closing step
  std::vector<double> payoffs;
};

// Mixing oracle: theta <- mu theta + (1 - mu) e_BR, with BR drawn between the
// behavioral and quality responses, closed by one response-diversity step.
MixedStrategy matrix_oracle(const MatrixOracleInput& input, double lambda1,
                            double lambda2, const OracleParams& params, Rng& rng,
                            MatrixOracleTrace* trace = nullptr);

// Pure best response to the opponent's Nash mixture (lowest index on ties).
MixedStrategy matrix_exact_best_response(const MatrixOracleInput& input);

// argmax_j D_KL(e_j || pi): the least-played pure strategy.
Eigen::Index behavioral_best_response(const MixedStrategy& own_aggregate,
                                      FDivergenceKind kind);

// Uniform draw on the simplex.
MixedStrategy random_simplex_point(Eigen::Index size, Rng& rng);

// ---------------------------------------------------------------------------
// Differential (mixture) games.

struct DiffOracleInput {
  const MixtureGameSpec* spec = nullptr;
  std::span<const DiffPolicy> own_population;
  MixedStrategy own_sigma;
  std::span<const DiffPolicy> opp_population;
  MixedStrategy opp_sigma;
  // Current meta-game, own population as rows and opponents as columns.
  const Mat* meta = nullptr;
};

struct DiffObjective {
  double total = 0.0;
  double payoff = 0.0;
  double behavioral = 0.0;
  double response = 0.0;
  Point2 grad = Point2::Zero();
  Point2 grad_payoff = Point2::Zero();
  Point2 grad_behavioral = Point2::Zero();
  Point2 grad_response = Point2::Zero();
  Vec response_weights;  // dF/da, the per-opponent reweighting
};

// Precomputed, x-independent parts of the objective.
class DiffObjectiveContext {
 public:
  DiffObjectiveContext(const DiffOracleInput& input, const OracleParams& params);

  // p(x) + lambda1 * d_occ(x) + lambda2 * d_rew(x) and its gradient.
  DiffObjective evaluate(const Point2& x, double lambda1, double lambda2) const;

  // Payoff row a(x) against every opponent.
  Vec payoff_row(const Point2& x) const;

  bool has_behavioral_term() const { return has_own_; }
  bool has_response_term() const { return has_meta_; }

 private:
  const MixtureGameSpec* spec_;
  std::vector<Point2> opponents_;
  Vec opp_sigma_;
  FDivergenceKind divergence_;
  bool normalize_;
  bool has_own_ = false;
  Vec own_target_;  // normalized (or raw) Nash-aggregated own embedding
  bool has_meta_ = false;
  PseudoInverseParts meta_parts_;
};

struct DiffOracleTrace {
  std::vector<Point2> steps;  // point after each Adam update
  std::vector<double> objective;
};

// Starting point for a new policy: the highest-weighted own policy plus
// Gaussian noise, or a uniform point in the radius-r disk.
Point2 initial_diff_point(const MixtureGameSpec& spec,
                          std::span<const DiffPolicy> own_population,
                          const MixedStrategy* own_sigma, double noise, Rng& rng);
Point2 uniform_disk_point(double radius, Rng& rng);

DiffPolicy diff_oracle(const DiffOracleInput& input, double lambda1,
                       double lambda2, const OracleParams& params, Rng& rng,
                       DiffOracleTrace* trace = nullptr);

// Same loop from a given start.
DiffPolicy diff_oracle_from(const DiffOracleInput& input, const Point2& start,
                            double lambda1, double lambda2,
                            const OracleParams& params,
                            DiffOracleTrace* trace = nullptr);

}  // namespace udiv
