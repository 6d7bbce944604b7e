#include <gtest/gtest.h>

#include <cmath>

#include "reference.hpp"
#include "udiv/diversity.hpp"

using namespace udiv;
using udiv::testing::finite_difference;
using udiv::testing::random_distribution;
using udiv::testing::random_matrix;
using udiv::testing::relative_error;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}
Vec v1(double a) { return Vec::Constant(1, a); }

}  // namespace

TEST(FDivergence, Examples) {
  EXPECT_NEAR(f_divergence(FDivergenceKind::KL, v2(0.3, 0.7), v2(0.3, 0.7)), 0.0, 1e-15);
  EXPECT_NEAR(f_divergence(FDivergenceKind::KL, v2(1, 0), v2(0.5, 0.5)), std::log(2.0), 1e-15);
  EXPECT_NEAR(f_divergence(FDivergenceKind::TotalVariation, v2(1, 0), v2(0, 1)), 1.0, 1e-15);
}

TEST(FDivergence, KlWithoutAbsoluteContinuityIsInfinite) {
  const double d = f_divergence(FDivergenceKind::KL, v2(0.5, 0.5), v2(1, 0));
  EXPECT_EQ(d, kInfiniteDivergence);
  EXPECT_GT(d, 1e300);
  EXPECT_EQ(f_divergence(FDivergenceKind::ReverseKL, v2(1, 0), v2(0.5, 0.5)),
            kInfiniteDivergence);
}

TEST(FDivergence, NegativeEntriesRejected) {
  EXPECT_THROW(f_divergence(FDivergenceKind::KL, v2(-0.1, 1.1), v2(0.5, 0.5)), InvariantError);
  EXPECT_THROW(f_divergence(FDivergenceKind::KL, v2(0.5, 0.5), Vec::Constant(3, 1.0 / 3)),
               DimensionError);
}

TEST(FDivergence, GeneratorsVanishAtOne) {
  for (auto kind : kAllDivergences) EXPECT_NEAR(divergence_generator(kind, 1.0), 0.0, 1e-15);
}

TEST(FDivergence, NonNegativeAndZeroOnlyAtEquality) {
  std::mt19937_64 rng(11);
  for (auto kind : kAllDivergences) {
    for (int k = 0; k < 200; ++k) {
      const Vec p = random_distribution(5, rng);
      const Vec q = random_distribution(5, rng);
      EXPECT_GE(f_divergence(kind, p, q), 0.0);
      EXPECT_NEAR(f_divergence(kind, p, p), 0.0, 1e-14);
      if (kind != FDivergenceKind::TotalVariation && kind != FDivergenceKind::ReverseKL) {
        EXPECT_GT(f_divergence(kind, p, q), 0.0);
      }
    }
  }
}

TEST(FDivergence, ParseNames) {
  for (auto kind : kAllDivergences) EXPECT_EQ(parse_divergence(to_string(kind)), kind);
  EXPECT_FALSE(parse_divergence("wasserstein").has_value());
}

TEST(FDivergence, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(12);
  for (auto kind : kAllDivergences) {
    if (kind == FDivergenceKind::TotalVariation) continue;
    for (int k = 0; k < 20; ++k) {
      const Vec p = random_distribution(4, rng, 0.05);
      const Vec q = random_distribution(4, rng, 0.05);
      const Vec fd = finite_difference(
          [&](const Vec& x) {
            double s = 0.0;
            for (Eigen::Index j = 0; j < x.size(); ++j)
              s += q[j] * divergence_generator(kind, x[j] / q[j]);
            return s;
          },
          p, 1e-6);
      EXPECT_LT(relative_error(f_divergence_grad_p(kind, p, q), fd), 1e-6) << to_string(kind);
    }
  }
}

// Joint distributions sharing the conditional channel P(Y|X) have the same
// divergence as their X-marginals.
TEST(FDivergence, SharedChannelJointEqualsMarginal) {
  std::mt19937_64 rng(13);
  for (auto kind : kAllDivergences) {
    for (int k = 0; k < 100; ++k) {
      const int nx = 4, ny = 3;
      const Vec px = random_distribution(nx, rng, 0.01);
      const Vec qx = random_distribution(nx, rng, 0.01);
      Mat channel(nx, ny);
      for (int x = 0; x < nx; ++x) channel.row(x) = random_distribution(ny, rng).transpose();
      Vec pj(nx * ny), qj(nx * ny);
      for (int x = 0; x < nx; ++x) {
        for (int y = 0; y < ny; ++y) {
          pj[x * ny + y] = px[x] * channel(x, y);
          qj[x * ny + y] = qx[x] * channel(x, y);
        }
      }
      EXPECT_NEAR(f_divergence(kind, pj, qj), f_divergence(kind, px, qx), 1e-10);
    }
  }
}

TEST(ConvexProjection, OneDimensionalHull) {
  Mat a(3, 1);
  a << 0, -1, 1;
  EXPECT_NEAR(exact_convex_projection(a, v1(0.5)).distance_sq, 0.0, 1e-12);
  const ProjectionResult r = exact_convex_projection(a, v1(2.0));
  EXPECT_NEAR(r.distance_sq, 1.0, 1e-12);
  EXPECT_NEAR(r.beta[2], 1.0, 1e-12);
}

TEST(ConvexProjection, IdentityToOrigin) {
  const ProjectionResult r = exact_convex_projection(Mat::Identity(2, 2), v2(0, 0));
  EXPECT_NEAR(r.distance_sq, 0.5, 1e-12);
  EXPECT_NEAR(r.beta[0], 0.5, 1e-12);
  EXPECT_NEAR(r.beta[1], 0.5, 1e-12);
}

TEST(ConvexProjection, ReportedDistanceMatchesBeta) {
  std::mt19937_64 rng(14);
  for (int k = 0; k < 200; ++k) {
    const Mat a = random_matrix(6, 4, rng);
    const Vec t = random_matrix(4, 1, rng, -2, 2).col(0);
    const ProjectionResult r = exact_convex_projection(a, t);
    EXPECT_NEAR(r.distance_sq, (a.transpose() * r.beta.weights() - t).squaredNorm(), 1e-8);
    EXPECT_LT(r.kkt_residual, kProjectionKktTolerance);
  }
}

TEST(ConvexProjection, NoRowsRejected) {
  EXPECT_THROW(exact_convex_projection(Mat(0, 2), v2(0, 0)), InvariantError);
  EXPECT_THROW(rd_lower_bound(Mat(0, 2), v2(0, 0)), InvariantError);
}

TEST(RdLowerBound, Examples) {
  EXPECT_NEAR(rd_lower_bound(Mat::Constant(1, 1, 1.0), v1(2.0)), 1.0, 1e-12);
  EXPECT_NEAR(rd_lower_bound(Mat::Identity(2, 2), v2(0, 0)), 0.5, 1e-12);
  EXPECT_NEAR(rd_lower_bound(Mat::Identity(2, 2), v2(0.5, 0.5)), 0.0, 1e-12);
}

TEST(RdLowerBound, RankDeficientZeroesFirstTerm) {
  Mat a(2, 2);
  a << 1, 1, 2, 2;
  const PseudoInverseParts parts = pseudo_inverse_parts(a);
  EXPECT_EQ(parts.sigma_min, 0.0);
  const Vec t = v2(3.0, -1.0);
  const Vec resid = t - parts.projector * t;
  EXPECT_NEAR(rd_lower_bound(a, t), resid.squaredNorm(), 1e-12);
}

TEST(RdLowerBound, NeverExceedsProjection) {
  std::mt19937_64 rng(15);
  std::uniform_int_distribution<int> dim(1, 8);
  for (int k = 0; k < 1000; ++k) {
    const Mat a = random_matrix(dim(rng), dim(rng), rng);
    const Vec t = random_matrix(a.cols(), 1, rng, -2, 2).col(0);
    EXPECT_LE(rd_lower_bound(a, t), exact_convex_projection(a, t).distance_sq + 1e-8);
  }
}

TEST(RdLowerBound, TightInsideHullAndRowSpace) {
  std::mt19937_64 rng(16);
  for (int k = 0; k < 200; ++k) {
    const Mat a = random_matrix(3, 5, rng);
    const Vec t = a.transpose() * random_distribution(3, rng);
    EXPECT_NEAR(rd_lower_bound(a, t), 0.0, 1e-10);
    EXPECT_NEAR(exact_convex_projection(a, t).distance_sq, 0.0, 1e-10);
  }
}

TEST(RdLowerBoundGrad, Examples) {
  EXPECT_NEAR(rd_lower_bound_grad(Mat::Constant(1, 1, 1.0), v1(2.0))[0], 2.0, 1e-12);
  EXPECT_LT(rd_lower_bound_grad(Mat::Identity(2, 2), v2(0.5, 0.5)).norm(), 1e-12);
}

TEST(RdLowerBoundGrad, MatchesFiniteDifferences) {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 100; ++k) {
    const Mat a = random_matrix(4, 3, rng);
    const Vec t = random_matrix(3, 1, rng, -2, 2).col(0);
    const Vec fd = finite_difference([&](const Vec& x) { return rd_lower_bound(a, x); }, t);
    EXPECT_LT(relative_error(rd_lower_bound_grad(a, t), fd), 1e-5);
  }
}
