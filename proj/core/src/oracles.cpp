#include "udiv/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace udiv {

OracleParams OracleParams::matrix_defaults() {
  OracleParams p;
  p.learning_rate = 0.5;
  return p;
}

OracleParams OracleParams::differential_defaults() {
  OracleParams p;
  p.learning_rate = 0.1;
  return p;
}

void OracleParams::validate_matrix() const {
  if (!(learning_rate > 0.0 && learning_rate < 1.0)) {
    throw InvariantError("matrix oracle learning rate must lie in (0, 1)");
  }
  if (!(improvement_threshold > 0.0)) {
    throw InvariantError("improvement threshold must be positive");
  }
  if (max_inner_loops < 1) throw InvariantError("max_inner_loops must be >= 1");
}

void OracleParams::validate_differential() const {
  if (n_train < 1) throw InvariantError("n_train must be >= 1");
  if (!(learning_rate > 0.0)) throw InvariantError("learning rate must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 &&
        adam_beta2 < 1.0)) {
    throw InvariantError("Adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw InvariantError("Adam epsilon must be positive");
}

double LambdaSchedule::decay_factor(double t) {
  return 1.0 - 0.7 / (1.0 + std::exp(-0.25 * (t - 25.0)));
}

std::pair<double, double> lambda_at(const LambdaSchedule& schedule, int t) {
  if (t < 0) throw InvariantError("lambda schedule needs t >= 0");
  const double m = schedule.decay ? LambdaSchedule::decay_factor(t) : 1.0;
  return {schedule.lambda1 * m, schedule.lambda2 * m};
}

Vec adam_step(AdamState& state, const Vec& gradient, double lr, double beta1,
              double beta2, double eps) {
  require_same_size(state.m.size(), gradient.size(), "adam_step");
  ++state.t;
  state.m = beta1 * state.m + (1.0 - beta1) * gradient;
  state.v = beta2 * state.v + (1.0 - beta2) * gradient.cwiseProduct(gradient);
  const double c1 = 1.0 - std::pow(beta1, state.t);
  const double c2 = 1.0 - std::pow(beta2, state.t);
  const Vec m_hat = state.m / c1;
  const Vec v_hat = state.v / c2;
  return lr * m_hat.array() / (v_hat.array().sqrt() + eps);
}

// ---------------------------------------------------------------------------

MixedStrategy random_simplex_point(Eigen::Index size, Rng& rng) {
  std::exponential_distribution<double> expo(1.0);
  Vec w(size);
  for (Eigen::Index i = 0; i < size; ++i) w[i] = expo(rng);
  return MixedStrategy::normalized(w);
}

Eigen::Index behavioral_best_response(const MixedStrategy& own_aggregate,
                                      FDivergenceKind kind) {
  const Eigen::Index n = own_aggregate.size();
  Vec scores(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    scores[j] = f_divergence(kind, MixedStrategy::pure(n, j).weights(),
                             own_aggregate.weights());
  }
  return argmax_lowest(scores);
}

namespace {

void check_matrix_input(const MatrixOracleInput& input) {
  if (input.payoff == nullptr) throw InvariantError("matrix oracle without payoff");
  if (input.opp_population.empty()) {
    throw InvariantError("matrix oracle needs a nonempty opponent population");
  }
  require_same_size(static_cast<Eigen::Index>(input.opp_population.size()),
                    input.opp_sigma.size(), "opponent Nash weights");
  if (!input.own_population.empty()) {
    require_same_size(static_cast<Eigen::Index>(input.own_population.size()),
                      input.own_sigma.size(), "own Nash weights");
  }
}

Vec opponent_mixture_payoffs(const MatrixOracleInput& input) {
  const MixedStrategy q = aggregate(input.opp_population, input.opp_sigma);
  require_same_size(q.size(), input.payoff->cols(), "opponent strategy");
  return *input.payoff * q.weights();
}

}  // namespace

MixedStrategy matrix_exact_best_response(const MatrixOracleInput& input) {
  check_matrix_input(input);
  const Vec pq = opponent_mixture_payoffs(input);
  return MixedStrategy::pure(pq.size(), argmax_lowest(pq));
}

MixedStrategy matrix_oracle(const MatrixOracleInput& input, double lambda1,
                            double lambda2, const OracleParams& params, Rng& rng,
                            MatrixOracleTrace* trace) {
  check_matrix_input(input);
  params.validate_matrix();
  const Mat& payoff = *input.payoff;
  const Eigen::Index n = payoff.rows();
  const Vec pq = opponent_mixture_payoffs(input);
  const Eigen::Index br_qual = argmax_lowest(pq);

  const MixedStrategy own_aggregate =
      input.own_population.empty()
          ? MixedStrategy::uniform(n)
          : aggregate(input.own_population, input.own_sigma);
  const Eigen::Index br_occ = behavioral_best_response(own_aggregate, params.divergence);

  // Probabilities outside [0, 1] only make sense as gradient weights.
  const double p_occ = std::clamp(lambda1, 0.0, 1.0);
  const double p_rew = std::clamp(lambda2, 0.0, 1.0);
  const double mu = params.learning_rate;
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  Vec theta = random_simplex_point(n, rng).weights();
  double reward = theta.dot(pq);
  int loops = 0;
  double improvement = 0.0;
  if (trace) trace->payoffs.push_back(reward);
  do {
    const Eigen::Index br = coin(rng) < p_occ ? br_occ : br_qual;
    theta *= mu;
    theta[br] += 1.0 - mu;
    const double updated = theta.dot(pq);
    improvement = updated - reward;
    reward = updated;
    ++loops;
    if (trace) trace->payoffs.push_back(reward);
  } while (improvement >= params.improvement_threshold &&
           loops < params.max_inner_loops);

  Eigen::Index br_final = br_qual;
  const bool use_rew = coin(rng) < p_rew;
  if (use_rew && !input.own_population.empty()) {
    // Payoff rows of every pure strategy against the opponent pool, scored by
    // the closed-form hull-distance bound on the current meta-game.
    const auto m = static_cast<Eigen::Index>(input.own_population.size());
    const auto k = static_cast<Eigen::Index>(input.opp_population.size());
    Mat opp(payoff.cols(), k);
    for (Eigen::Index j = 0; j < k; ++j) opp.col(j) = input.opp_population[j].weights();
    const Mat pure_rows = payoff * opp;  // n x k
    Mat meta(m, k);
    for (Eigen::Index i = 0; i < m; ++i) {
      meta.row(i) = input.own_population[i].weights().transpose() * pure_rows;
    }
    const PseudoInverseParts parts = pseudo_inverse_parts(meta);
    Vec scores(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      scores[j] = rd_lower_bound(parts, pure_rows.row(j).transpose());
    }
    br_final = argmax_lowest(scores);
  }
  theta *= mu;
  theta[br_final] += 1.0 - mu;

  if (trace) {
    trace->inner_loops = loops;
    trace->br_qual = br_qual;
    trace->br_occ = br_occ;
    trace->br_final = br_final;
    trace->payoffs.push_back(theta.dot(pq));
  }
  return MixedStrategy::normalized(theta);
}

// ---------------------------------------------------------------------------

Point2 uniform_disk_point(double radius, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r = radius * std::sqrt(unit(rng));
  const double angle = 2.0 * std::numbers::pi * unit(rng);
  return {r * std::cos(angle), r * std::sin(angle)};
}

Point2 initial_diff_point(const MixtureGameSpec& spec,
                          std::span<const DiffPolicy> own_population,
                          const MixedStrategy* own_sigma, double noise, Rng& rng) {
  if (own_population.empty()) return uniform_disk_point(spec.radius, rng);
  Eigen::Index anchor = 0;
  if (own_sigma != nullptr) {
    require_same_size(static_cast<Eigen::Index>(own_population.size()),
                      own_sigma->size(), "own Nash weights");
    anchor = argmax_lowest(own_sigma->weights());
  }
  std::normal_distribution<double> gauss(0.0, noise);
  const double dx = gauss(rng);
  const double dy = gauss(rng);
  return own_population[anchor].x() + Point2(dx, dy);
}

DiffObjectiveContext::DiffObjectiveContext(const DiffOracleInput& input,
                                           const OracleParams& params)
    : spec_(input.spec),
      divergence_(params.divergence),
      normalize_(params.normalize_embedding) {
  if (spec_ == nullptr) throw InvariantError("differential oracle without game");
  if (input.opp_population.empty()) {
    throw InvariantError("differential oracle needs a nonempty opponent population");
  }
  require_same_size(static_cast<Eigen::Index>(input.opp_population.size()),
                    input.opp_sigma.size(), "opponent Nash weights");
  for (const auto& p : input.opp_population) opponents_.push_back(p.x());
  opp_sigma_ = input.opp_sigma.weights();

  if (!input.own_population.empty()) {
    require_same_size(static_cast<Eigen::Index>(input.own_population.size()),
                      input.own_sigma.size(), "own Nash weights");
    has_own_ = true;
    Vec mix = Vec::Zero(spec_->num_components());
    for (std::size_t k = 0; k < input.own_population.size(); ++k) {
      mix += input.own_sigma[static_cast<Eigen::Index>(k)] *
             input.own_population[k].embedding();
    }
    if (normalize_) {
      mix = mix.cwiseMax(kEmbeddingFloor);
      mix /= mix.sum();
    }
    own_target_ = mix;
    if (input.meta != nullptr && input.meta->rows() > 0) {
      require_same_size(input.meta->rows(),
                        static_cast<Eigen::Index>(input.own_population.size()),
                        "meta-game rows");
      require_same_size(input.meta->cols(),
                        static_cast<Eigen::Index>(opponents_.size()),
                        "meta-game columns");
      has_meta_ = true;
      meta_parts_ = pseudo_inverse_parts(*input.meta);
    }
  }
}

Vec DiffObjectiveContext::payoff_row(const Point2& x) const {
  Vec a(static_cast<Eigen::Index>(opponents_.size()));
  for (std::size_t k = 0; k < opponents_.size(); ++k) {
    a[static_cast<Eigen::Index>(k)] = mixture_payoff(*spec_, x, opponents_[k]);
  }
  return a;
}

DiffObjective DiffObjectiveContext::evaluate(const Point2& x, double lambda1,
                                             double lambda2) const {
  const int kc = spec_->num_components();
  const auto n_opp = static_cast<Eigen::Index>(opponents_.size());
  const Mat s = spec_->cyclic_real();
  const Vec pi = embed(*spec_, x);
  const Eigen::MatrixX2d jac = embed_jacobian(*spec_, x);

  Mat opp_embed(kc, n_opp);
  for (Eigen::Index k = 0; k < n_opp; ++k) opp_embed.col(k) = embed(*spec_, opponents_[k]);
  const Mat s_opp = s * opp_embed;  // column k: S pi(y_k)
  const Vec opp_mass = opp_embed.colwise().sum().transpose();

  // a_k = pi^T S pi_k + 1^T pi - 1^T pi_k, da_k/dx = J^T (S pi_k + 1).
  const Vec a = s_opp.transpose() * pi + Vec::Constant(n_opp, pi.sum()) - opp_mass;

  DiffObjective out;
  out.payoff = opp_sigma_.dot(a);
  const Vec payoff_outer = s_opp * opp_sigma_ + Vec::Constant(kc, opp_sigma_.sum());
  out.grad_payoff = jac.transpose() * payoff_outer;

  if (has_own_) {
    if (normalize_) {
      const Vec floored = pi.cwiseMax(kEmbeddingFloor);
      const double mass = floored.sum();
      const Vec p = floored / mass;
      out.behavioral = f_divergence(divergence_, p, own_target_);
      const Vec gp = f_divergence_grad_p(divergence_, p, own_target_);
      Vec gu = (gp.array() - gp.dot(p)) / mass;
      for (int k = 0; k < kc; ++k) {
        if (!(pi[k] > kEmbeddingFloor)) gu[k] = 0.0;
      }
      out.grad_behavioral = jac.transpose() * gu;
    } else {
      out.behavioral = f_divergence(divergence_, pi, own_target_);
      out.grad_behavioral =
          jac.transpose() * f_divergence_grad_p(divergence_, pi, own_target_);
    }
  }

  if (has_meta_) {
    out.response = rd_lower_bound(meta_parts_, a);
    out.response_weights = rd_lower_bound_grad(meta_parts_, a);
    const Vec outer = s_opp * out.response_weights +
                      Vec::Constant(kc, out.response_weights.sum());
    out.grad_response = jac.transpose() * outer;
  } else {
    out.response_weights = Vec::Zero(n_opp);
  }

  out.total = out.payoff + lambda1 * out.behavioral + lambda2 * out.response;
  out.grad = out.grad_payoff + lambda1 * out.grad_behavioral +
             lambda2 * out.grad_response;
  return out;
}

DiffPolicy diff_oracle_from(const DiffOracleInput& input, const Point2& start,
                            double lambda1, double lambda2,
                            const OracleParams& params, DiffOracleTrace* trace) {
  params.validate_differential();
  const DiffObjectiveContext context(input, params);
  Point2 x = start;
  AdamState adam(2);
  for (int step = 0; step < params.n_train; ++step) {
    const DiffObjective obj = context.evaluate(x, lambda1, lambda2);
    const Vec delta = adam_step(adam, obj.grad, params.learning_rate,
                                params.adam_beta1, params.adam_beta2,
                                params.adam_eps);
    x += Point2(delta[0], delta[1]);
    if (trace) {
      trace->steps.push_back(x);
      trace->objective.push_back(obj.total);
    }
  }
  return DiffPolicy(*input.spec, x);
}

DiffPolicy diff_oracle(const DiffOracleInput& input, double lambda1,
                       double lambda2, const OracleParams& params, Rng& rng,
                       DiffOracleTrace* trace) {
  if (input.spec == nullptr) throw InvariantError("differential oracle without game");
  if (input.opp_population.empty()) {
    throw InvariantError("differential oracle needs a nonempty opponent population");
  }
  params.validate_differential();
  const MixedStrategy* own_sigma =
      input.own_population.empty() ? nullptr : &input.own_sigma;
  const Point2 start = initial_diff_point(*input.spec, input.own_population,
                                          own_sigma, params.init_noise, rng);
  return diff_oracle_from(input, start, lambda1, lambda2, params, trace);
}

}  // namespace udiv
