#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace udiv {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Point2 = Eigen::Vector2d;

// Thrown when operands disagree in shape.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Thrown when an input violates a documented invariant (non-finite entries,
// probabilities off the simplex, empty populations, ...).
class InvariantError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Parse failures carry the 1-based line they were detected on (0 if unknown).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what
                                : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

void require_same_size(Eigen::Index a, Eigen::Index b, const char* what);

// A probability vector over pure strategies.
//
// Entries in [-1e-12, 0) are clamped to zero on construction; anything more
// negative, or a sum further than 1e-9 from one, is rejected.
class MixedStrategy {
 public:
  static constexpr double kNegativeSlack = 1e-12;
  static constexpr double kSumTolerance = 1e-9;

  MixedStrategy() = default;
  explicit MixedStrategy(Vec weights);

  static MixedStrategy pure(Eigen::Index size, Eigen::Index index);
  static MixedStrategy uniform(Eigen::Index size);
  // Clamps negatives to zero and rescales to unit mass. Throws if nothing
  // positive is left.
  static MixedStrategy normalized(const Vec& weights);

  const Vec& weights() const { return weights_; }
  Eigen::Index size() const { return weights_.size(); }
  double operator[](Eigen::Index i) const { return weights_[i]; }

  bool operator==(const MixedStrategy& other) const {
    return weights_ == other.weights_;
  }

 private:
  Vec weights_;
};

// Index of the largest entry; ties go to the lowest index.
Eigen::Index argmax_lowest(const Vec& v);
Eigen::Index argmin_lowest(const Vec& v);

}  // namespace udiv
