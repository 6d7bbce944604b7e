#pragma once

#include <limits>
#include <optional>
#include <string_view>

#include "udiv/types.hpp"

namespace udiv {

// f-divergences D_f(p||q) = sum_j q_j f(p_j / q_j) with f convex, f(1) = 0.
//
//   KL                f(t) = t log t
//   ReverseKL         f(t) = -log t
//   JensenShannon     f(t) = (t log(2t/(1+t)) + log(2/(1+t))) / 2
//   TotalVariation    f(t) = |t - 1| / 2
//   SquaredHellinger  f(t) = (sqrt(t) - 1)^2
enum class FDivergenceKind {
  KL,
  ReverseKL,
  JensenShannon,
  TotalVariation,
  SquaredHellinger,
};

inline constexpr FDivergenceKind kAllDivergences[] = {
    FDivergenceKind::KL, FDivergenceKind::ReverseKL,
    FDivergenceKind::JensenShannon, FDivergenceKind::TotalVariation,
    FDivergenceKind::SquaredHellinger};

// Value reported when absolute continuity fails for the KL-type kinds. It
// compares greater than every finite divergence.
inline constexpr double kInfiniteDivergence =
    std::numeric_limits<double>::infinity();

std::string_view to_string(FDivergenceKind kind);
std::optional<FDivergenceKind> parse_divergence(std::string_view name);

// The generator f itself, for t >= 0.
double divergence_generator(FDivergenceKind kind, double t);

// Nonnegative on the simplex; nonnegative vectors off the simplex get the
// plain sum, which may be negative.
double f_divergence(FDivergenceKind kind, const Vec& p, const Vec& q);

// Gradient of D_f(p||q) with respect to p, valid where p > 0 and q > 0.
Vec f_divergence_grad_p(FDivergenceKind kind, const Vec& p, const Vec& q);

// ---------------------------------------------------------------------------
// Response diversity: distance from a payoff row to the convex hull of rows.

struct ProjectionResult {
  double distance_sq = 0.0;  // ||A^T beta - a||^2
  MixedStrategy beta;        // minimizing convex weights over the rows of A
  int iterations = 0;
  double kkt_residual = 0.0;
};

class ProjectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kProjectionKktTolerance = 1e-8;
inline constexpr int kProjectionMaxIterations = 10000;

// min over the simplex of ||A^T beta - a||^2 for A of size M x N and a in R^N.
// Solved exactly with Wolfe's minimum-norm-point iteration; throws
// ProjectionError if the KKT residual cannot be driven below tolerance.
ProjectionResult exact_convex_projection(const Mat& a, const Vec& target);

// Singular-value pieces shared by the closed-form bound and its gradient.
struct PseudoInverseParts {
  Mat pinv_t;        // (A^T)^+, M x N
  Mat projector;     // A^T (A^T)^+, N x N
  double sigma_min;  // smallest of the M singular values of A^T (0 if rank < M)
};

inline constexpr double kSingularValueCutoff = 1e-10;

PseudoInverseParts pseudo_inverse_parts(const Mat& a);

// F(a) = sigma_min^2 (1 - 1^T (A^T)^+ a)^2 / M + ||(I - A^T (A^T)^+) a||^2,
// a lower bound of the hull distance.
double rd_lower_bound(const Mat& a, const Vec& target);
double rd_lower_bound(const PseudoInverseParts& parts, const Vec& target);
Vec rd_lower_bound_grad(const Mat& a, const Vec& target);
Vec rd_lower_bound_grad(const PseudoInverseParts& parts, const Vec& target);

}  // namespace udiv
