#include "udiv/types.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace udiv {

void require_same_size(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": size " + std::to_string(a) +
                         " does not match " + std::to_string(b));
  }
}

MixedStrategy::MixedStrategy(Vec weights) : weights_(std::move(weights)) {
  if (weights_.size() == 0) throw InvariantError("empty mixed strategy");
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    const double w = weights_[i];
    if (!std::isfinite(w)) throw InvariantError("non-finite strategy weight");
    if (w < -kNegativeSlack) {
      throw InvariantError("negative strategy weight " + std::to_string(w));
    }
    if (w < 0.0) weights_[i] = 0.0;
  }
  const double total = weights_.sum();
  if (std::abs(total - 1.0) > kSumTolerance) {
    throw InvariantError("strategy weights sum to " + std::to_string(total));
  }
}

MixedStrategy MixedStrategy::pure(Eigen::Index size, Eigen::Index index) {
  if (index < 0 || index >= size) throw DimensionError("pure strategy index");
  Vec w = Vec::Zero(size);
  w[index] = 1.0;
  return MixedStrategy(std::move(w));
}

MixedStrategy MixedStrategy::uniform(Eigen::Index size) {
  if (size <= 0) throw InvariantError("empty mixed strategy");
  return MixedStrategy(Vec::Constant(size, 1.0 / static_cast<double>(size)));
}

MixedStrategy MixedStrategy::normalized(const Vec& weights) {
  Vec w = weights.cwiseMax(0.0);
  const double total = w.sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw InvariantError("cannot normalize a vector without positive mass");
  }
  w /= total;
  return MixedStrategy(std::move(w));
}

Eigen::Index argmax_lowest(const Vec& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

Eigen::Index argmin_lowest(const Vec& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v[i] < v[best]) best = i;
  }
  return best;
}

}  // namespace udiv
