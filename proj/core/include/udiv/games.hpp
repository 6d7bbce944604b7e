#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <vector>

#include "udiv/types.hpp"

namespace udiv {

// Two-player matrix game. `payoff(i, j)` is the row player's payoff for the
// pure pair (i, j); with `zero_sum` the column player receives its negation.
class MatrixGame {
 public:
  static constexpr double kSymmetryTolerance = 1e-12;

  MatrixGame() = default;
  // Infers the symmetric flag (square and P = -P^T within `symmetry_tol`).
  explicit MatrixGame(Mat payoff, double symmetry_tol = kSymmetryTolerance);

  const Mat& payoff() const { return payoff_; }
  Eigen::Index rows() const { return payoff_.rows(); }
  Eigen::Index cols() const { return payoff_.cols(); }
  bool zero_sum() const { return true; }
  bool symmetric() const { return symmetric_; }

 private:
  Mat payoff_;
  bool symmetric_ = false;
};

// p^T P q for the row player.
double matrix_payoff(const MatrixGame& game, const MixedStrategy& p,
                     const MixedStrategy& q);
double matrix_payoff(const MatrixGame& game, const Vec& p, const Vec& q);
// Column player's payoff; the negation of matrix_payoff in zero-sum games.
double matrix_column_payoff(const MatrixGame& game, const MixedStrategy& p,
                            const MixedStrategy& q);

// Rock, Scissors, Paper in that order; row 0 = (0, 1, -1).
MatrixGame build_rps();

// Transitive skill gap plus a random antisymmetric cycle:
//   P(i, j) = skill_scale * (g_i - g_j) + cycle_scale * C(i, j).
MatrixGame gen_synthetic_metagame(int n, double skill_scale,
                                  double cycle_scale, std::uint64_t seed);

// CSV payoff table, optionally headed by "# rows=M cols=N".
MatrixGame load_payoff_csv(const std::filesystem::path& path);
MatrixGame parse_payoff_csv(std::istream& in);
// Applies P -> scale * P + shift. Symmetry survives only when shift == 0.
MatrixGame rescale(const MatrixGame& game, double scale, double shift);
void write_payoff_csv(const MatrixGame& game, std::ostream& out);

// ---------------------------------------------------------------------------
// Non-transitive mixture game on the plane.

struct MixtureGameSpec {
  int l = 4;
  double radius = 5.0;
  std::vector<Point2> centers;  // 2l+1 points on the circle of `radius`
  Eigen::Matrix2d precision = 0.5 * Eigen::Matrix2d::Identity();
  Eigen::MatrixXi cyclic;  // S: S(i,k) = 1 iff 0 < (k-i) mod (2l+1) <= l

  int num_components() const { return 2 * l + 1; }
  Mat cyclic_real() const { return cyclic.cast<double>(); }
};

MixtureGameSpec build_mixture_game(int l = 4, double radius = 5.0,
                                   double precision_scale = 0.5);

// pi_k(x) = exp(-(x - mu_k)^T Sigma (x - mu_k) / 2).
Vec embed(const MixtureGameSpec& spec, const Point2& x);
// d pi / d x, one row per component.
Eigen::MatrixX2d embed_jacobian(const MixtureGameSpec& spec, const Point2& x);

// A point in the plane together with its cached Gaussian embedding.
class DiffPolicy {
 public:
  DiffPolicy() = default;
  DiffPolicy(const MixtureGameSpec& spec, const Point2& x)
      : x_(x), embedding_(embed(spec, x)) {}

  void move_to(const MixtureGameSpec& spec, const Point2& x) {
    x_ = x;
    embedding_ = embed(spec, x);
  }
  const Point2& x() const { return x_; }
  const Vec& embedding() const { return embedding_; }

 private:
  Point2 x_ = Point2::Zero();
  Vec embedding_;
};

// phi(x1, x2) = pi1^T S pi2 + 1^T (pi1 - pi2), payoff to the holder of x1.
double mixture_payoff(const MixtureGameSpec& spec, const Point2& x1,
                      const Point2& x2);
double mixture_payoff(const MixtureGameSpec& spec, const DiffPolicy& a,
                      const DiffPolicy& b);
double mixture_payoff_embedded(const MixtureGameSpec& spec, const Vec& pi1,
                               const Vec& pi2);
// Gradient of mixture_payoff with respect to x1.
Point2 mixture_payoff_grad(const MixtureGameSpec& spec, const Point2& x1,
                           const Point2& x2);

}  // namespace udiv
