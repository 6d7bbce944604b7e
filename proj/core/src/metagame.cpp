#include "udiv/metagame.hpp"

#include <algorithm>
#include <vector>

namespace udiv {

NashResult fictitious_play(const Mat& a, int iterations) {
  if (iterations < 1) throw InvariantError("fictitious play needs >= 1 iteration");
  if (a.size() == 0) throw InvariantError("fictitious play on an empty matrix");
  if (!a.allFinite()) throw InvariantError("non-finite meta-game entry");
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();

  // Running averages; the uniform initial belief counts as the first play.
  Vec row_avg = Vec::Constant(m, 1.0 / static_cast<double>(m));
  Vec col_avg = Vec::Constant(n, 1.0 / static_cast<double>(n));
  Vec row_payoffs = a * col_avg;               // (A sigma_c)_i
  Vec col_payoffs = a.transpose() * row_avg;   // (sigma_r^T A)_j
  for (int t = 1; t <= iterations; ++t) {
    const Eigen::Index br_row = argmax_lowest(row_payoffs);
    const Eigen::Index br_col = argmin_lowest(col_payoffs);
    const double keep = static_cast<double>(t) / static_cast<double>(t + 1);
    const double step = 1.0 / static_cast<double>(t + 1);
    row_avg *= keep;
    row_avg[br_row] += step;
    col_avg *= keep;
    col_avg[br_col] += step;
    row_payoffs = keep * row_payoffs + step * a.col(br_col);
    col_payoffs = keep * col_payoffs + step * a.row(br_row).transpose();
  }

  NashResult result;
  result.sigma_row = MixedStrategy::normalized(row_avg);
  result.sigma_col = MixedStrategy::normalized(col_avg);
  const Vec versus_col = a * result.sigma_col.weights();
  const Vec versus_row = a.transpose() * result.sigma_row.weights();
  result.value = result.sigma_row.weights().dot(versus_col);
  result.upper_bound = versus_col.maxCoeff();
  result.lower_bound = versus_row.minCoeff();
  result.residual = std::max(0.0, result.upper_bound - result.lower_bound);
  result.iterations = iterations;
  return result;
}

NashResult solve_zero_sum(const Mat& a) {
  if (a.size() == 0) throw InvariantError("zero-sum solve on an empty matrix");
  if (!a.allFinite()) throw InvariantError("non-finite meta-game entry");
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  // With A' = A - min(A) + 1 > 0: max 1^T y s.t. A' y <= 1, y >= 0. The game
  // value of A' is 1 / 1^T y*, the column strategy y* / 1^T y*, and the row
  // strategy is read off the slack reduced costs.
  const double shift = 1.0 - a.minCoeff();
  Mat tab = Mat::Zero(m + 1, n + m + 1);
  tab.topLeftCorner(m, n) = a.array() + shift;
  tab.block(0, n, m, m).setIdentity();
  tab.col(n + m).head(m).setOnes();
  tab.row(m).head(n).setConstant(-1.0);
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n + i;

  constexpr double kEps = 1e-12;
  const int max_pivots = 50 * static_cast<int>(m + n) + 1000;
  int pivots = 0;
  while (true) {
    Eigen::Index enter = -1;
    for (Eigen::Index c = 0; c < n + m; ++c) {
      if (tab(m, c) < -kEps) {
        enter = c;
        break;
      }
    }
    if (enter < 0) break;
    if (++pivots > max_pivots) throw InvariantError("simplex did not terminate");
    Eigen::Index leave = -1;
    double best = 0.0;
    for (Eigen::Index r = 0; r < m; ++r) {
      if (tab(r, enter) <= kEps) continue;
      const double ratio = tab(r, n + m) / tab(r, enter);
      if (leave < 0 || ratio < best - kEps ||
          (ratio <= best + kEps && basis[static_cast<std::size_t>(r)] <
                                       basis[static_cast<std::size_t>(leave)])) {
        leave = r;
        best = ratio;
      }
    }
    // The feasible region is bounded because A' > 0.
    if (leave < 0) throw InvariantError("simplex found an unbounded direction");
    tab.row(leave) /= tab(leave, enter);
    for (Eigen::Index r = 0; r <= m; ++r) {
      if (r != leave && tab(r, enter) != 0.0) {
        tab.row(r) -= tab(r, enter) * tab.row(leave);
      }
    }
    basis[static_cast<std::size_t>(leave)] = enter;
  }

  Vec y = Vec::Zero(n);
  for (Eigen::Index r = 0; r < m; ++r) {
    const Eigen::Index b = basis[static_cast<std::size_t>(r)];
    if (b < n) y[b] = std::max(0.0, tab(r, n + m));
  }
  const Vec u = tab.row(m).segment(n, m).transpose().cwiseMax(0.0);

  NashResult result;
  result.sigma_row = MixedStrategy::normalized(u);
  result.sigma_col = MixedStrategy::normalized(y);
  const Vec versus_col = a * result.sigma_col.weights();
  const Vec versus_row = a.transpose() * result.sigma_row.weights();
  result.value = result.sigma_row.weights().dot(versus_col);
  result.upper_bound = versus_col.maxCoeff();
  result.lower_bound = versus_row.minCoeff();
  result.residual = std::max(0.0, result.upper_bound - result.lower_bound);
  result.iterations = pivots;
  return result;
}

double restricted_value(const Mat& a, const MixedStrategy& sigma_row,
                        const MixedStrategy& sigma_col) {
  require_same_size(sigma_row.size(), a.rows(), "restricted_value rows");
  require_same_size(sigma_col.size(), a.cols(), "restricted_value cols");
  return sigma_row.weights().dot(a * sigma_col.weights());
}

MixedStrategy aggregate(std::span<const MixedStrategy> population,
                        const MixedStrategy& sigma) {
  require_same_size(static_cast<Eigen::Index>(population.size()), sigma.size(),
                    "aggregate");
  if (population.empty()) throw InvariantError("aggregate of empty population");
  Vec mix = Vec::Zero(population.front().size());
  for (std::size_t k = 0; k < population.size(); ++k) {
    require_same_size(population[k].size(), mix.size(), "aggregate member");
    mix += sigma[static_cast<Eigen::Index>(k)] * population[k].weights();
  }
  return MixedStrategy::normalized(mix);
}

}  // namespace udiv
