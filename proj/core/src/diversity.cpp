#include "udiv/diversity.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace udiv {

namespace {

// Validates and clamps [-slack, 0) entries to zero.
Vec sanitize(const Vec& v, const char* which) {
  Vec out = v;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (!std::isfinite(out[i])) {
      throw InvariantError(std::string(which) + " has a non-finite entry");
    }
    if (out[i] < -MixedStrategy::kNegativeSlack) {
      throw InvariantError(std::string(which) + " has a negative entry");
    }
    if (out[i] < 0.0) out[i] = 0.0;
  }
  return out;
}

// x log(x / y) with 0 log(0 / y) = 0.
double xlogxy(double x, double y) {
  if (x == 0.0) return 0.0;
  return x * std::log(x / y);
}

}  // namespace

std::string_view to_string(FDivergenceKind kind) {
  switch (kind) {
    case FDivergenceKind::KL: return "kl";
    case FDivergenceKind::ReverseKL: return "reverse_kl";
    case FDivergenceKind::JensenShannon: return "js";
    case FDivergenceKind::TotalVariation: return "tv";
    case FDivergenceKind::SquaredHellinger: return "hellinger";
  }
  return "kl";
}

std::optional<FDivergenceKind> parse_divergence(std::string_view name) {
  for (const auto kind : kAllDivergences) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

double divergence_generator(FDivergenceKind kind, double t) {
  switch (kind) {
    case FDivergenceKind::KL:
      return t == 0.0 ? 0.0 : t * std::log(t);
    case FDivergenceKind::ReverseKL:
      return t == 0.0 ? kInfiniteDivergence : -std::log(t);
    case FDivergenceKind::JensenShannon:
      return 0.5 * ((t == 0.0 ? 0.0 : t * std::log(2.0 * t / (1.0 + t))) +
                    std::log(2.0 / (1.0 + t)));
    case FDivergenceKind::TotalVariation:
      return 0.5 * std::abs(t - 1.0);
    case FDivergenceKind::SquaredHellinger: {
      const double r = std::sqrt(t) - 1.0;
      return r * r;
    }
  }
  return 0.0;
}

double f_divergence(FDivergenceKind kind, const Vec& p_in, const Vec& q_in) {
  require_same_size(p_in.size(), q_in.size(), "f_divergence");
  const Vec p = sanitize(p_in, "f_divergence p");
  const Vec q = sanitize(q_in, "f_divergence q");
  double total = 0.0;
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    const double pj = p[j];
    const double qj = q[j];
    switch (kind) {
      case FDivergenceKind::KL:
        if (pj > 0.0 && qj == 0.0) return kInfiniteDivergence;
        total += xlogxy(pj, qj);
        break;
      case FDivergenceKind::ReverseKL:
        if (qj > 0.0 && pj == 0.0) return kInfiniteDivergence;
        total += xlogxy(qj, pj);
        break;
      case FDivergenceKind::JensenShannon: {
        const double m = 0.5 * (pj + qj);
        total += 0.5 * (xlogxy(pj, m) + xlogxy(qj, m));
        break;
      }
      case FDivergenceKind::TotalVariation:
        total += 0.5 * std::abs(pj - qj);
        break;
      case FDivergenceKind::SquaredHellinger: {
        const double d = std::sqrt(pj) - std::sqrt(qj);
        total += d * d;
        break;
      }
    }
  }
  // On the simplex a negative total is rounding; unnormalized inputs (raw
  // embeddings) keep the plain sum so its gradient stays consistent.
  const bool on_simplex = std::abs(p.sum() - 1.0) < 1e-9 && std::abs(q.sum() - 1.0) < 1e-9;
  return on_simplex ? std::max(0.0, total) : total;
}

Vec f_divergence_grad_p(FDivergenceKind kind, const Vec& p, const Vec& q) {
  require_same_size(p.size(), q.size(), "f_divergence_grad_p");
  Vec g(p.size());
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    const double pj = p[j];
    const double qj = q[j];
    switch (kind) {
      case FDivergenceKind::KL:
        g[j] = std::log(pj / qj) + 1.0;
        break;
      case FDivergenceKind::ReverseKL:
        g[j] = -qj / pj;
        break;
      case FDivergenceKind::JensenShannon:
        g[j] = 0.5 * std::log(2.0 * pj / (pj + qj));
        break;
      case FDivergenceKind::TotalVariation:
        g[j] = pj > qj ? 0.5 : (pj < qj ? -0.5 : 0.0);
        break;
      case FDivergenceKind::SquaredHellinger:
        g[j] = 1.0 - std::sqrt(qj / pj);
        break;
    }
  }
  return g;
}

// ---------------------------------------------------------------------------

ProjectionResult exact_convex_projection(const Mat& a, const Vec& target) {
  const Eigen::Index m = a.rows();
  if (m == 0) throw InvariantError("projection onto the hull of zero rows");
  require_same_size(a.cols(), target.size(), "exact_convex_projection");

  // Nearest point to the origin in conv{p_k}, p_k = row_k - target.
  const Mat points = a.transpose().colwise() - target;  // N x M
  const Vec sq_norms = points.colwise().squaredNorm().transpose();
  const double scale = std::max(1.0, sq_norms.maxCoeff());
  const double z1 = 1e-13 * scale;  // major-cycle optimality
  const double z2 = 1e-12;          // weight positivity

  std::vector<Eigen::Index> support{argmin_lowest(sq_norms)};
  std::vector<double> weights{1.0};
  Vec x = points.col(support.front());

  auto current_point = [&] {
    Vec y = Vec::Zero(points.rows());
    for (std::size_t i = 0; i < support.size(); ++i) {
      y += weights[i] * points.col(support[i]);
    }
    return y;
  };

  int iterations = 0;
  while (true) {
    if (++iterations > kProjectionMaxIterations) {
      throw ProjectionError("convex projection did not converge in " +
                            std::to_string(kProjectionMaxIterations) +
                            " iterations");
    }
    const Vec dots = points.transpose() * x;
    const Eigen::Index j = argmin_lowest(dots);
    if (x.squaredNorm() - dots[j] <= z1 ||
        std::find(support.begin(), support.end(), j) != support.end()) {
      break;
    }
    support.push_back(j);
    weights.push_back(0.0);

    while (true) {
      // Affine minimum-norm point of the current support:
      //   [Q 1; 1^T 0] [v; mu] = [0; 1],  Q = P_S^T P_S.
      const auto s = static_cast<Eigen::Index>(support.size());
      Mat kkt = Mat::Zero(s + 1, s + 1);
      for (Eigen::Index r = 0; r < s; ++r) {
        for (Eigen::Index c = 0; c < s; ++c) {
          kkt(r, c) = points.col(support[r]).dot(points.col(support[c]));
        }
        kkt(r, s) = 1.0;
        kkt(s, r) = 1.0;
      }
      Vec rhs = Vec::Zero(s + 1);
      rhs[s] = 1.0;
      const Vec sol = kkt.completeOrthogonalDecomposition().solve(rhs);
      const Vec v = sol.head(s);

      if ((v.array() > z2).all()) {
        weights.assign(v.data(), v.data() + s);
        break;
      }
      // Step from the current weights toward v until a weight hits zero.
      double theta = 1.0;
      for (Eigen::Index i = 0; i < s; ++i) {
        if (v[i] <= z2) {
          const double denom = weights[i] - v[i];
          if (denom > 0.0) theta = std::min(theta, weights[i] / denom);
        }
      }
      for (Eigen::Index i = 0; i < s; ++i) {
        weights[i] = theta * v[i] + (1.0 - theta) * weights[i];
      }
      // Drop the vanishing weights; always drop at least the smallest.
      const auto smallest = static_cast<std::size_t>(
          std::min_element(weights.begin(), weights.end()) - weights.begin());
      std::vector<Eigen::Index> kept_support;
      std::vector<double> kept_weights;
      for (std::size_t i = 0; i < support.size(); ++i) {
        if (i == smallest || weights[i] <= z2) continue;
        kept_support.push_back(support[i]);
        kept_weights.push_back(weights[i]);
      }
      double total = 0.0;
      for (double w : kept_weights) total += w;
      for (double& w : kept_weights) w /= total;
      support = std::move(kept_support);
      weights = std::move(kept_weights);
    }
    x = current_point();
  }

  Vec beta = Vec::Zero(m);
  for (std::size_t i = 0; i < support.size(); ++i) {
    beta[support[i]] += std::max(0.0, weights[i]);
  }
  ProjectionResult result;
  result.beta = MixedStrategy::normalized(beta);
  const Vec residual = a.transpose() * result.beta.weights() - target;
  result.distance_sq = residual.squaredNorm();
  result.iterations = iterations;
  // Frank-Wolfe gap at beta, relative to the problem scale.
  const Vec grad_dots = points.transpose() * residual;
  result.kkt_residual =
      std::max(0.0, residual.squaredNorm() - grad_dots.minCoeff()) / scale;
  if (!(result.kkt_residual < kProjectionKktTolerance)) {
    throw ProjectionError("convex projection KKT residual " +
                          std::to_string(result.kkt_residual) +
                          " above tolerance");
  }
  return result;
}

PseudoInverseParts pseudo_inverse_parts(const Mat& a) {
  const Eigen::Index m = a.rows();
  if (m == 0) throw InvariantError("response-diversity bound on an empty table");
  const Mat at = a.transpose();  // N x M
  Eigen::JacobiSVD<Mat> svd(at, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& sv = svd.singularValues();  // min(N, M), descending
  const double sigma_max = sv.size() ? sv[0] : 0.0;
  const double cutoff = kSingularValueCutoff * sigma_max;

  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > cutoff && sv[i] > 0.0) ++rank;
  }
  PseudoInverseParts parts;
  const Mat u = svd.matrixU().leftCols(rank);  // N x r
  const Mat v = svd.matrixV().leftCols(rank);  // M x r
  const Vec inv = sv.head(rank).cwiseInverse();
  parts.pinv_t = v * inv.asDiagonal() * u.transpose();  // M x N
  parts.projector = u * u.transpose();                  // N x N
  // A^T maps R^M -> R^N; its smallest singular value over all M directions
  // vanishes when rank < M (in particular whenever M > N).
  parts.sigma_min = rank < m ? 0.0 : sv[m - 1];
  return parts;
}

double rd_lower_bound(const PseudoInverseParts& parts, const Vec& target) {
  require_same_size(parts.projector.rows(), target.size(), "rd_lower_bound");
  const auto m = static_cast<double>(parts.pinv_t.rows());
  const double slack = 1.0 - (parts.pinv_t * target).sum();
  const Vec off_range = target - parts.projector * target;
  return parts.sigma_min * parts.sigma_min * slack * slack / m +
         off_range.squaredNorm();
}

double rd_lower_bound(const Mat& a, const Vec& target) {
  require_same_size(a.cols(), target.size(), "rd_lower_bound");
  return rd_lower_bound(pseudo_inverse_parts(a), target);
}

Vec rd_lower_bound_grad(const PseudoInverseParts& parts, const Vec& target) {
  require_same_size(parts.projector.rows(), target.size(), "rd_lower_bound_grad");
  const auto m = static_cast<double>(parts.pinv_t.rows());
  const double slack = 1.0 - (parts.pinv_t * target).sum();
  const Vec ones_back = parts.pinv_t.transpose() * Vec::Ones(parts.pinv_t.rows());
  return -(2.0 * parts.sigma_min * parts.sigma_min / m) * slack * ones_back +
         2.0 * (target - parts.projector * target);
}

Vec rd_lower_bound_grad(const Mat& a, const Vec& target) {
  require_same_size(a.cols(), target.size(), "rd_lower_bound_grad");
  return rd_lower_bound_grad(pseudo_inverse_parts(a), target);
}

}  // namespace udiv
