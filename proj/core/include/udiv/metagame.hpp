#pragma once

#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "udiv/games.hpp"
#include "udiv/types.hpp"

namespace udiv {

// Raised when a payoff evaluation fails while filling the meta-game; the
// offending (row, col) indices are attached.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(Eigen::Index row, Eigen::Index col, const std::string& cause)
      : std::runtime_error("payoff evaluation failed at (" +
                           std::to_string(row) + ", " + std::to_string(col) +
                           "): " + cause),
        row_(row),
        col_(col) {}
  Eigen::Index row() const { return row_; }
  Eigen::Index col() const { return col_; }

 private:
  Eigen::Index row_;
  Eigen::Index col_;
};

// Empirical meta-game A(k, j) = phi(row_k, col_j) over two append-only
// populations. Only entries involving a newly appended policy are evaluated.
template <class RowPolicy, class ColPolicy = RowPolicy>
class PayoffTable {
 public:
  using Evaluator = std::function<double(const RowPolicy&, const ColPolicy&)>;

  explicit PayoffTable(Evaluator evaluator) : evaluator_(std::move(evaluator)) {}

  void add_row(RowPolicy policy) {
    rows_.push_back(std::move(policy));
    const Eigen::Index r = num_rows() - 1;
    entries_.conservativeResize(num_rows(), num_cols());
    for (Eigen::Index j = 0; j < num_cols(); ++j) entries_(r, j) = eval(r, j);
  }

  void add_col(ColPolicy policy) {
    cols_.push_back(std::move(policy));
    const Eigen::Index c = num_cols() - 1;
    entries_.conservativeResize(num_rows(), num_cols());
    for (Eigen::Index i = 0; i < num_rows(); ++i) entries_(i, c) = eval(i, c);
  }

  const Mat& entries() const { return entries_; }
  const std::vector<RowPolicy>& row_policies() const { return rows_; }
  const std::vector<ColPolicy>& col_policies() const { return cols_; }
  Eigen::Index num_rows() const { return static_cast<Eigen::Index>(rows_.size()); }
  Eigen::Index num_cols() const { return static_cast<Eigen::Index>(cols_.size()); }
  bool empty() const { return rows_.empty() || cols_.empty(); }

  // Recomputes one entry without touching the cache.
  double evaluate(Eigen::Index row, Eigen::Index col) const {
    return evaluator_(rows_.at(row), cols_.at(col));
  }

 private:
  double eval(Eigen::Index row, Eigen::Index col) const {
    double value = 0.0;
    try {
      value = evaluator_(rows_[row], cols_[col]);
    } catch (const std::exception& e) {
      throw EvaluationError(row, col, e.what());
    }
    if (!std::isfinite(value)) throw EvaluationError(row, col, "non-finite payoff");
    return value;
  }

  Evaluator evaluator_;
  std::vector<RowPolicy> rows_;
  std::vector<ColPolicy> cols_;
  Mat entries_;
};

// Single population playing itself in a symmetric game. The table is square;
// appending a policy adds both its row and its column.
template <class Policy>
class SymmetricPayoffTable {
 public:
  using Evaluator = std::function<double(const Policy&, const Policy&)>;

  // With `antisymmetric`, phi(b, a) is taken as -phi(a, b) and the diagonal
  // as zero instead of being evaluated.
  SymmetricPayoffTable(Evaluator evaluator, bool antisymmetric)
      : evaluator_(std::move(evaluator)), antisymmetric_(antisymmetric) {}

  void add(Policy policy) {
    policies_.push_back(std::move(policy));
    const Eigen::Index n = size();
    const Eigen::Index k = n - 1;
    entries_.conservativeResize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (antisymmetric_) {
        const double v = j == k ? 0.0 : eval(k, j);
        entries_(k, j) = v;
        entries_(j, k) = -v;
      } else {
        entries_(k, j) = eval(k, j);
        if (j != k) entries_(j, k) = eval(j, k);
      }
    }
  }

  const Mat& entries() const { return entries_; }
  const std::vector<Policy>& policies() const { return policies_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(policies_.size()); }
  bool empty() const { return policies_.empty(); }

  double evaluate(Eigen::Index row, Eigen::Index col) const {
    return evaluator_(policies_.at(row), policies_.at(col));
  }

 private:
  double eval(Eigen::Index row, Eigen::Index col) const {
    double value = 0.0;
    try {
      value = evaluator_(policies_[row], policies_[col]);
    } catch (const std::exception& e) {
      throw EvaluationError(row, col, e.what());
    }
    if (!std::isfinite(value)) throw EvaluationError(row, col, "non-finite payoff");
    return value;
  }

  Evaluator evaluator_;
  bool antisymmetric_;
  std::vector<Policy> policies_;
  Mat entries_;
};

struct NashResult {
  MixedStrategy sigma_row;
  MixedStrategy sigma_col;
  double value = 0.0;     // sigma_row^T A sigma_col
  int iterations = 0;
  double residual = 0.0;  // max_i (A sigma_col)_i - min_j (sigma_row^T A)_j
  // Guaranteed bounds on the game value implied by the averaged profile.
  double lower_bound = 0.0;
  double upper_bound = 0.0;
};

inline constexpr int kMetaSolverIterations = 1000;
inline constexpr int kPeSolverIterations = 2000;

// Simultaneous fictitious play on the zero-sum game A (row maximizes).
// Beliefs start uniform; best responses break ties toward the lowest index.
NashResult fictitious_play(const Mat& a, int iterations = kMetaSolverIterations);

// Exact solution of the zero-sum game A by the simplex method (Bland's rule)
// on the shifted column-player LP. `iterations` counts pivots.
NashResult solve_zero_sum(const Mat& a);

double restricted_value(const Mat& a, const MixedStrategy& sigma_row,
                        const MixedStrategy& sigma_col);

// sum_k sigma_k * pi^k for populations of mixed strategies.
MixedStrategy aggregate(std::span<const MixedStrategy> population,
                        const MixedStrategy& sigma);

// A population kept as a weighted mixture (sampling weights), for policy
// classes that cannot be averaged pointwise.
template <class Policy>
struct PolicyMixture {
  std::vector<Policy> members;
  MixedStrategy weights;
};

template <class Policy>
PolicyMixture<Policy> aggregate_mixture(std::span<const Policy> population,
                                        const MixedStrategy& sigma) {
  require_same_size(static_cast<Eigen::Index>(population.size()), sigma.size(),
                    "aggregate");
  return {std::vector<Policy>(population.begin(), population.end()), sigma};
}

}  // namespace udiv
