#include "udiv/tabular.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "udiv/oracles.hpp"

namespace udiv {

TabularMG::TabularMG(int num_states, int actions1, int actions2, double gamma,
                     Vec eta)
    : num_states_(num_states),
      actions_{actions1, actions2},
      gamma_(gamma),
      eta_(std::move(eta)) {
  if (num_states < 1 || actions1 < 1 || actions2 < 1) {
    throw InvariantError("Markov game needs at least one state and action");
  }
  if (static_cast<long>(num_states) * actions1 * actions2 > kMaxStateActions) {
    throw InvariantError("Markov game exceeds " +
                         std::to_string(kMaxStateActions) +
                         " state/joint-action pairs");
  }
  require_same_size(eta_.size(), num_states, "TabularMG initial distribution");
  const std::size_t triples =
      static_cast<std::size_t>(num_states) * actions1 * actions2;
  transition_.assign(triples * num_states, 0.0);
  reward_.assign(triples, 0.0);
}

void TabularMG::validate() const {
  if (!(gamma_ >= 0.0 && gamma_ < 1.0)) {
    throw InvariantError("discount must lie in [0, 1)");
  }
  if ((eta_.array() < 0.0).any() || std::abs(eta_.sum() - 1.0) > 1e-12) {
    throw InvariantError("initial distribution is not on the simplex");
  }
  for (int s = 0; s < num_states_; ++s) {
    for (int a1 = 0; a1 < actions_[0]; ++a1) {
      for (int a2 = 0; a2 < actions_[1]; ++a2) {
        if (!std::isfinite(reward(s, a1, a2))) {
          throw InvariantError("non-finite reward");
        }
        double total = 0.0;
        for (int n = 0; n < num_states_; ++n) {
          const double p = transition(s, a1, a2, n);
          if (!(p >= 0.0) || !std::isfinite(p)) {
            throw InvariantError("negative or non-finite transition probability");
          }
          total += p;
        }
        if (std::abs(total - 1.0) > 1e-12) {
          throw InvariantError("transition row (" + std::to_string(s) + ", " +
                               std::to_string(a1) + ", " + std::to_string(a2) +
                               ") does not sum to one");
        }
      }
    }
  }
}

namespace {

int read_int(std::istringstream& in, std::size_t line, const char* what) {
  long long v = 0;
  if (!(in >> v)) throw ParseError(std::string("expected integer ") + what, line);
  return static_cast<int>(v);
}

double read_double(std::istringstream& in, std::size_t line, const char* what) {
  std::string tok;
  if (!(in >> tok)) throw ParseError(std::string("expected number ") + what, line);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    throw ParseError("invalid number '" + tok + "'", line);
  }
  if (used != tok.size() || !std::isfinite(v)) {
    throw ParseError("invalid number '" + tok + "'", line);
  }
  return v;
}

void check_index(int v, int bound, std::size_t line, const char* what) {
  if (v < 0 || v >= bound) {
    throw ParseError(std::string(what) + " index " + std::to_string(v) +
                         " out of range",
                     line);
  }
}

}  // namespace

TabularMG parse_tabular_mg(std::istream& in) {
  int states = -1, a1 = -1, a2 = -1;
  double gamma = -1.0;
  std::vector<double> init;
  struct Entry {
    int s, a1, a2, next;
    double value;
    std::size_t line;
  };
  std::vector<Entry> transitions, rewards;

  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    std::istringstream ss(raw);
    std::string key;
    if (!(ss >> key)) continue;
    if (key == "states") {
      states = read_int(ss, line, "state count");
      if (states < 1) throw ParseError("states must be >= 1", line);
    } else if (key == "actions") {
      a1 = read_int(ss, line, "action count");
      a2 = read_int(ss, line, "action count");
      if (a1 < 1 || a2 < 1) throw ParseError("action counts must be >= 1", line);
    } else if (key == "gamma") {
      gamma = read_double(ss, line, "discount");
    } else if (key == "init") {
      if (states < 1) throw ParseError("'init' before 'states'", line);
      init.clear();
      for (int s = 0; s < states; ++s) init.push_back(read_double(ss, line, "init"));
    } else if (key == "transition" || key == "reward") {
      if (states < 1 || a1 < 1) {
        throw ParseError("'" + key + "' before 'states' and 'actions'", line);
      }
      Entry e{};
      e.line = line;
      e.s = read_int(ss, line, "state");
      e.a1 = read_int(ss, line, "action");
      e.a2 = read_int(ss, line, "action");
      check_index(e.s, states, line, "state");
      check_index(e.a1, a1, line, "player 1 action");
      check_index(e.a2, a2, line, "player 2 action");
      if (key == "transition") {
        e.next = read_int(ss, line, "next state");
        check_index(e.next, states, line, "next state");
      }
      e.value = read_double(ss, line, "value");
      (key == "transition" ? transitions : rewards).push_back(e);
    } else {
      throw ParseError("unknown key '" + key + "'", line);
    }
    std::string extra;
    if (ss >> extra) throw ParseError("trailing token '" + extra + "'", line);
  }
  if (states < 1) throw ParseError("missing 'states'", line);
  if (a1 < 1) throw ParseError("missing 'actions'", line);
  if (gamma < 0.0) throw ParseError("missing 'gamma'", line);
  if (!(gamma < 1.0)) throw ParseError("gamma must lie in [0, 1)", line);
  if (init.empty()) throw ParseError("missing 'init'", line);
  if (static_cast<int>(init.size()) != states) {
    throw ParseError("'init' has " + std::to_string(init.size()) +
                         " entries, expected " + std::to_string(states),
                     line);
  }

  TabularMG mg(states, a1, a2, gamma, Eigen::Map<const Vec>(init.data(), states));
  std::vector<char> has_row(static_cast<std::size_t>(states) * a1 * a2, 0);
  for (const auto& e : transitions) {
    const std::size_t idx = (static_cast<std::size_t>(e.s) * a1 + e.a1) * a2 + e.a2;
    has_row[idx] = 1;
    if (e.value < 0.0) throw ParseError("negative transition probability", e.line);
    mg.set_transition(e.s, e.a1, e.a2, e.next,
                      mg.transition(e.s, e.a1, e.a2, e.next) + e.value);
  }
  for (int s = 0; s < states; ++s) {
    for (int i = 0; i < a1; ++i) {
      for (int j = 0; j < a2; ++j) {
        if (!has_row[(static_cast<std::size_t>(s) * a1 + i) * a2 + j]) {
          mg.set_transition(s, i, j, s, 1.0);
        }
      }
    }
  }
  for (const auto& e : rewards) mg.set_reward(e.s, e.a1, e.a2, e.value);
  try {
    mg.validate();
  } catch (const InvariantError& err) {
    throw ParseError(err.what(), 0);
  }
  return mg;
}

TabularMG load_tabular_mg(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  return parse_tabular_mg(in);
}

TabularMG single_state_game(const Mat& payoff, double gamma) {
  TabularMG mg(1, static_cast<int>(payoff.rows()), static_cast<int>(payoff.cols()),
               gamma, Vec::Ones(1));
  for (int i = 0; i < payoff.rows(); ++i) {
    for (int j = 0; j < payoff.cols(); ++j) {
      mg.set_transition(0, i, j, 0, 1.0);
      mg.set_reward(0, i, j, payoff(i, j));
    }
  }
  mg.validate();
  return mg;
}

TabularPolicy TabularPolicy::uniform(int num_states, int num_actions) {
  return {Mat::Constant(num_states, num_actions, 1.0 / num_actions)};
}

namespace {

void check_policy(const TabularMG& mg, const TabularPolicy& pi, int player) {
  if (pi.num_states() != mg.num_states() || pi.num_actions() != mg.num_actions(player)) {
    throw DimensionError("policy shape does not match the Markov game");
  }
}

}  // namespace

ConditionalPolicy to_conditional(const TabularMG& mg, const JointPolicy& pi) {
  check_policy(mg, pi.row, 0);
  check_policy(mg, pi.col, 1);
  ConditionalPolicy out{Mat(mg.num_states(), mg.joint_actions())};
  for (int s = 0; s < mg.num_states(); ++s) {
    for (int a1 = 0; a1 < mg.num_actions(0); ++a1) {
      for (int a2 = 0; a2 < mg.num_actions(1); ++a2) {
        out.probs(s, mg.joint_index(a1, a2)) = pi.row.probs(s, a1) * pi.col.probs(s, a2);
      }
    }
  }
  return out;
}

OccupancyMeasure occupancy(const TabularMG& mg, const ConditionalPolicy& pi,
                           const Vec& eta) {
  const int S = mg.num_states();
  if (pi.probs.rows() != S || pi.probs.cols() != mg.joint_actions()) {
    throw DimensionError("joint policy shape does not match the Markov game");
  }
  require_same_size(eta.size(), S, "occupancy initial distribution");
  Mat p_pi = Mat::Zero(S, S);
  for (int s = 0; s < S; ++s) {
    for (int a1 = 0; a1 < mg.num_actions(0); ++a1) {
      for (int a2 = 0; a2 < mg.num_actions(1); ++a2) {
        const double w = pi.probs(s, mg.joint_index(a1, a2));
        if (w == 0.0) continue;
        for (int n = 0; n < S; ++n) p_pi(s, n) += w * mg.transition(s, a1, a2, n);
      }
    }
  }
  const Mat system = Mat::Identity(S, S) - mg.gamma() * p_pi.transpose();
  const Vec state = (1.0 - mg.gamma()) * system.partialPivLu().solve(eta);
  OccupancyMeasure out{state.asDiagonal() * pi.probs};
  return out;
}

OccupancyMeasure occupancy(const TabularMG& mg, const ConditionalPolicy& pi) {
  return occupancy(mg, pi, mg.eta());
}

OccupancyMeasure occupancy(const TabularMG& mg, const JointPolicy& pi) {
  return occupancy(mg, to_conditional(mg, pi));
}

ConditionalPolicy policy_from_occupancy(const OccupancyMeasure& rho) {
  ConditionalPolicy out{Mat(rho.rho.rows(), rho.rho.cols())};
  for (Eigen::Index s = 0; s < rho.rho.rows(); ++s) {
    const double mass = rho.rho.row(s).sum();
    if (mass > 0.0) {
      out.probs.row(s) = rho.rho.row(s) / mass;
    } else {
      out.probs.row(s).setConstant(1.0 / static_cast<double>(rho.rho.cols()));
    }
  }
  return out;
}

OccupancyMeasure mixture_occupancy(const TabularMG& mg,
                                   std::span<const TabularPolicy> row_pop,
                                   std::span<const TabularPolicy> col_pop,
                                   const MixedStrategy& sigma_row,
                                   const MixedStrategy& sigma_col) {
  if (row_pop.empty() || col_pop.empty()) {
    throw InvariantError("mixture occupancy of an empty population");
  }
  require_same_size(static_cast<Eigen::Index>(row_pop.size()), sigma_row.size(),
                    "mixture_occupancy row weights");
  require_same_size(static_cast<Eigen::Index>(col_pop.size()), sigma_col.size(),
                    "mixture_occupancy column weights");
  OccupancyMeasure out{Mat::Zero(mg.num_states(), mg.joint_actions())};
  for (std::size_t k = 0; k < row_pop.size(); ++k) {
    for (std::size_t j = 0; j < col_pop.size(); ++j) {
      const double w = sigma_row[static_cast<Eigen::Index>(k)] *
                       sigma_col[static_cast<Eigen::Index>(j)];
      if (w == 0.0) continue;
      out.rho += w * occupancy(mg, JointPolicy{row_pop[k], col_pop[j]}).rho;
    }
  }
  return out;
}

double occupancy_divergence(FDivergenceKind kind, const OccupancyMeasure& rho1,
                            const OccupancyMeasure& rho2) {
  if (rho1.rho.rows() != rho2.rho.rows() || rho1.rho.cols() != rho2.rho.cols()) {
    throw DimensionError("occupancy measures have different shapes");
  }
  return f_divergence(kind, rho1.flat(), rho2.flat());
}

Mat intrinsic_reward(const OccupancyMeasure& target, IntrinsicMode mode,
                     int feature_dim, std::uint64_t seed) {
  const Eigen::Index S = target.rho.rows();
  const Eigen::Index J = target.rho.cols();
  const Vec rho = target.flat();
  const Eigen::Index K = rho.size();
  Vec flat(K);

  if (mode == IntrinsicMode::NegLogOccupancy) {
    for (Eigen::Index k = 0; k < K; ++k) {
      flat[k] = -std::log(std::max(rho[k], kOccupancyFloor));
    }
  } else {
    if (feature_dim < 1) throw InvariantError("feature_dim must be >= 1");
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Mat targets(feature_dim, K);   // g(s, a) = W e_sa
    Mat features(feature_dim, K);  // predictor input h(s, a) = R e_sa
    for (Eigen::Index k = 0; k < K; ++k) {
      for (int i = 0; i < feature_dim; ++i) targets(i, k) = normal(rng);
    }
    for (Eigen::Index k = 0; k < K; ++k) {
      for (int i = 0; i < feature_dim; ++i) features(i, k) = normal(rng);
    }
    // min_B sum_k rho_k ||B h_k - g_k||^2, minimum-norm solution.
    const Vec sqrt_rho = rho.cwiseMax(0.0).cwiseSqrt();
    const Mat x = sqrt_rho.asDiagonal() * features.transpose();  // K x d
    const Mat y = sqrt_rho.asDiagonal() * targets.transpose();   // K x d
    const Mat b_t = x.completeOrthogonalDecomposition().solve(y);  // d x d
    const Mat predicted = b_t.transpose() * features;
    flat = (predicted - targets).colwise().norm().transpose();
  }
  return flat.reshaped<Eigen::RowMajor>(S, J);
}

double expected_return(const TabularMG& mg, const ConditionalPolicy& pi) {
  const OccupancyMeasure rho = occupancy(mg, pi);
  double total = 0.0;
  for (int s = 0; s < mg.num_states(); ++s) {
    for (int a1 = 0; a1 < mg.num_actions(0); ++a1) {
      for (int a2 = 0; a2 < mg.num_actions(1); ++a2) {
        total += rho.rho(s, mg.joint_index(a1, a2)) * mg.reward(s, a1, a2);
      }
    }
  }
  return total / (1.0 - mg.gamma());
}

double expected_return(const TabularMG& mg, const JointPolicy& pi) {
  return expected_return(mg, to_conditional(mg, pi));
}

double player_return(const TabularMG& mg, int player, const TabularPolicy& own,
                     const TabularPolicy& opp) {
  return player == 0 ? expected_return(mg, JointPolicy{own, opp})
                     : -expected_return(mg, JointPolicy{opp, own});
}

TabularPolicy softmax_policy(const Mat& logits) {
  TabularPolicy out{Mat(logits.rows(), logits.cols())};
  for (Eigen::Index s = 0; s < logits.rows(); ++s) {
    const Eigen::RowVectorXd e =
        (logits.row(s).array() - logits.row(s).maxCoeff()).exp();
    out.probs.row(s) = e / e.sum();
  }
  return out;
}

ReturnGradient return_gradient(const TabularMG& mg, int player, const Mat& logits,
                               const TabularPolicy& opp, const Mat& r_int,
                               double lambda1) {
  if (player != 0 && player != 1) throw InvariantError("player must be 0 or 1");
  const int S = mg.num_states();
  const int own_n = mg.num_actions(player);
  const int opp_n = mg.num_actions(1 - player);
  if (logits.rows() != S || logits.cols() != own_n) {
    throw DimensionError("logits shape does not match the Markov game");
  }
  check_policy(mg, opp, 1 - player);
  const bool intrinsic = r_int.size() > 0 && lambda1 != 0.0;
  if (intrinsic && (r_int.rows() != S || r_int.cols() != mg.joint_actions())) {
    throw DimensionError("intrinsic reward shape does not match the Markov game");
  }
  const double sign = player == 0 ? 1.0 : -1.0;

  // Induced single-agent MDP against the fixed opponent.
  Mat r_bar = Mat::Zero(S, own_n);
  Mat p_bar = Mat::Zero(static_cast<Eigen::Index>(S) * own_n, S);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < own_n; ++a) {
      for (int b = 0; b < opp_n; ++b) {
        const double w = opp.probs(s, b);
        if (w == 0.0) continue;
        const int a1 = player == 0 ? a : b;
        const int a2 = player == 0 ? b : a;
        double r = sign * mg.reward(s, a1, a2);
        if (intrinsic) r += lambda1 * r_int(s, mg.joint_index(a1, a2));
        r_bar(s, a) += w * r;
        for (int n = 0; n < S; ++n) {
          p_bar(s * own_n + a, n) += w * mg.transition(s, a1, a2, n);
        }
      }
    }
  }

  const TabularPolicy pi = softmax_policy(logits);
  Mat p_pi = Mat::Zero(S, S);
  Vec r_pi = Vec::Zero(S);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < own_n; ++a) {
      p_pi.row(s) += pi.probs(s, a) * p_bar.row(s * own_n + a);
      r_pi[s] += pi.probs(s, a) * r_bar(s, a);
    }
  }
  const double g = mg.gamma();
  const Mat system = Mat::Identity(S, S) - g * p_pi;
  const Vec value = system.partialPivLu().solve(r_pi);
  // Unnormalized discounted visitation sum_t gamma^t P(s_t = s).
  const Vec visits = system.transpose().partialPivLu().solve(mg.eta());

  ReturnGradient out;
  out.value = mg.eta().dot(value);
  out.grad.resize(S, own_n);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < own_n; ++a) {
      const double q = r_bar(s, a) + g * p_bar.row(s * own_n + a).dot(value);
      out.grad(s, a) = visits[s] * pi.probs(s, a) * (q - value[s]);
    }
  }
  return out;
}

namespace {

struct LogitTrainer {
  const TabularMG& mg;
  int player;
  const TabularOracleParams& params;
  Mat logits;
  AdamState adam;

  LogitTrainer(const TabularMG& m, int p, const TabularOracleParams& prm,
               std::uint64_t seed)
      : mg(m), player(p), params(prm) {
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, params.init_scale);
    logits.resize(mg.num_states(), mg.num_actions(player));
    for (Eigen::Index s = 0; s < logits.rows(); ++s) {
      for (Eigen::Index a = 0; a < logits.cols(); ++a) logits(s, a) = normal(rng);
    }
    adam = AdamState(logits.size());
  }

  void step(const Mat& grad) {
    const Vec flat = grad.reshaped();
    const Vec delta = adam_step(adam, flat, params.learning_rate, params.adam_beta1,
                                params.adam_beta2, params.adam_eps);
    logits += delta.reshaped(logits.rows(), logits.cols());
  }
};

void check_params(const TabularOracleParams& params) {
  if (params.steps < 0 || params.rd_steps < 0) {
    throw InvariantError("tabular oracle step counts must be >= 0");
  }
  if (!(params.learning_rate > 0.0)) {
    throw InvariantError("learning rate must be positive");
  }
}

}  // namespace

TabularPolicy rl_best_response(const TabularMG& mg, int player,
                               std::span<const TabularPolicy> opponents,
                               const MixedStrategy& opp_weights, const Mat& r_int,
                               double lambda1, const TabularOracleParams& params,
                               std::uint64_t seed) {
  check_params(params);
  if (opponents.empty()) throw InvariantError("best response to an empty population");
  require_same_size(static_cast<Eigen::Index>(opponents.size()), opp_weights.size(),
                    "rl_best_response weights");
  LogitTrainer trainer(mg, player, params, seed);
  for (int t = 0; t < params.steps; ++t) {
    Mat grad = Mat::Zero(trainer.logits.rows(), trainer.logits.cols());
    for (std::size_t j = 0; j < opponents.size(); ++j) {
      const double w = opp_weights[static_cast<Eigen::Index>(j)];
      if (w == 0.0) continue;
      grad += w * return_gradient(mg, player, trainer.logits, opponents[j], r_int,
                                  lambda1)
                      .grad;
    }
    trainer.step(grad);
  }
  return softmax_policy(trainer.logits);
}

TabularPolicy tabular_unified_response(const TabularResponseInput& input,
                                       double lambda1, double lambda2,
                                       const TabularOracleParams& params,
                                       std::uint64_t seed) {
  check_params(params);
  if (input.mg == nullptr) throw InvariantError("missing Markov game");
  const TabularMG& mg = *input.mg;
  const int player = input.player;
  if (input.opp_population.empty()) {
    throw InvariantError("best response to an empty population");
  }
  require_same_size(static_cast<Eigen::Index>(input.opp_population.size()),
                    input.opp_sigma.size(), "tabular response opponent weights");

  Mat r_int;
  if (lambda1 != 0.0 && !input.own_population.empty()) {
    const OccupancyMeasure target =
        player == 0 ? mixture_occupancy(mg, input.own_population, input.opp_population,
                                        input.own_sigma, input.opp_sigma)
                    : mixture_occupancy(mg, input.opp_population, input.own_population,
                                        input.opp_sigma, input.own_sigma);
    r_int = intrinsic_reward(target, params.intrinsic, params.feature_dim, seed);
  }

  LogitTrainer trainer(mg, player, params, seed);
  const auto& opps = input.opp_population;
  for (int t = 0; t < params.steps; ++t) {
    Mat grad = Mat::Zero(trainer.logits.rows(), trainer.logits.cols());
    for (std::size_t j = 0; j < opps.size(); ++j) {
      const double w = input.opp_sigma[static_cast<Eigen::Index>(j)];
      if (w == 0.0) continue;
      grad += w * return_gradient(mg, player, trainer.logits, opps[j], r_int, lambda1).grad;
    }
    trainer.step(grad);
  }

  if (lambda2 == 0.0 || input.meta == nullptr || input.meta->rows() == 0 ||
      params.rd_steps == 0) {
    return softmax_policy(trainer.logits);
  }
  if (input.meta->cols() != static_cast<Eigen::Index>(opps.size())) {
    throw DimensionError("meta-game columns do not match the opponent population");
  }
  const TabularPolicy phase1 = softmax_policy(trainer.logits);
  Vec row(static_cast<Eigen::Index>(opps.size()));
  for (std::size_t j = 0; j < opps.size(); ++j) {
    row[static_cast<Eigen::Index>(j)] = player_return(mg, player, phase1, opps[j]);
  }
  const Vec weights =
      input.opp_sigma.weights() + lambda2 * rd_lower_bound_grad(*input.meta, row);
  const Vec magnitude = weights.cwiseAbs();
  if (!(magnitude.sum() > 0.0)) return phase1;

  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::discrete_distribution<std::size_t> pick(magnitude.data(),
                                               magnitude.data() + magnitude.size());
  const Mat no_intrinsic;
  for (int t = 0; t < params.rd_steps; ++t) {
    const std::size_t j = pick(rng);
    const double sign = weights[static_cast<Eigen::Index>(j)] > 0.0 ? 1.0 : -1.0;
    trainer.step(sign *
                 return_gradient(mg, player, trainer.logits, opps[j], no_intrinsic, 0.0)
                     .grad);
  }
  return softmax_policy(trainer.logits);
}

}  // namespace udiv
