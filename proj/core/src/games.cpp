#include "udiv/games.hpp"

#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <string_view>

#include "udiv/numfmt.hpp"

namespace udiv {

namespace {

bool all_finite(const Mat& m) { return m.allFinite(); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

MatrixGame::MatrixGame(Mat payoff, double symmetry_tol)
    : payoff_(std::move(payoff)) {
  if (payoff_.size() == 0) throw InvariantError("empty payoff matrix");
  if (!all_finite(payoff_)) throw InvariantError("non-finite payoff entry");
  symmetric_ = payoff_.rows() == payoff_.cols() &&
               (payoff_ + payoff_.transpose()).cwiseAbs().maxCoeff() <=
                   symmetry_tol;
}

double matrix_payoff(const MatrixGame& game, const Vec& p, const Vec& q) {
  require_same_size(p.size(), game.rows(), "matrix_payoff row strategy");
  require_same_size(q.size(), game.cols(), "matrix_payoff column strategy");
  return p.dot(game.payoff() * q);
}

double matrix_payoff(const MatrixGame& game, const MixedStrategy& p,
                     const MixedStrategy& q) {
  return matrix_payoff(game, p.weights(), q.weights());
}

double matrix_column_payoff(const MatrixGame& game, const MixedStrategy& p,
                            const MixedStrategy& q) {
  return -matrix_payoff(game, p, q);
}

MatrixGame build_rps() {
  Mat a(3, 3);
  a << 0, 1, -1,
      -1, 0, 1,
       1, -1, 0;
  return MatrixGame(std::move(a));
}

MatrixGame gen_synthetic_metagame(int n, double skill_scale,
                                  double cycle_scale, std::uint64_t seed) {
  if (n < 2) throw InvariantError("synthetic meta-game needs n >= 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec skill(n);
  for (int i = 0; i < n; ++i) skill[i] = normal(rng);
  Mat cycle = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double c = normal(rng);
      cycle(i, j) = c;
      cycle(j, i) = -c;
    }
  }
  Mat p(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      p(i, j) = skill_scale * (skill[i] - skill[j]) + cycle_scale * cycle(i, j);
    }
  }
  return MatrixGame(std::move(p));
}

MatrixGame parse_payoff_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  long header_rows = -1;
  long header_cols = -1;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      if (!rows.empty() || header_rows >= 0) {
        throw ParseError("header must be the first line", line_no);
      }
      long r = 0;
      long c = 0;
      if (std::sscanf(std::string(view).c_str(), "# rows=%ld cols=%ld", &r,
                      &c) != 2 ||
          r <= 0 || c <= 0) {
        throw ParseError("malformed header, expected '# rows=M cols=N'",
                         line_no);
      }
      header_rows = r;
      header_cols = c;
      continue;
    }
    std::vector<double> values;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = view.find(',', start);
      const std::string_view cell =
          trim(view.substr(start, comma == std::string_view::npos
                                      ? std::string_view::npos
                                      : comma - start));
      double value = 0.0;
      const auto [ptr, ec] =
          std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (cell.empty() || ec != std::errc() ||
          ptr != cell.data() + cell.size()) {
        throw ParseError("non-numeric cell '" + std::string(cell) + "'",
                         line_no);
      }
      if (!std::isfinite(value)) {
        throw ParseError("non-finite cell '" + std::string(cell) + "'",
                         line_no);
      }
      values.push_back(value);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && values.size() != rows.front().size()) {
      throw ParseError("ragged row: expected " +
                           std::to_string(rows.front().size()) +
                           " cells, found " + std::to_string(values.size()),
                       line_no);
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw ParseError("empty payoff file", line_no);
  const auto m = static_cast<Eigen::Index>(rows.size());
  const auto n = static_cast<Eigen::Index>(rows.front().size());
  if (header_rows >= 0 && (header_rows != m || header_cols != n)) {
    throw ParseError("header declares " + std::to_string(header_rows) + "x" +
                         std::to_string(header_cols) + " but body is " +
                         std::to_string(m) + "x" + std::to_string(n),
                     line_no);
  }
  Mat p(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) p(i, j) = rows[i][j];
  }
  return MatrixGame(std::move(p), 1e-9);
}

MatrixGame load_payoff_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  return parse_payoff_csv(in);
}

MatrixGame rescale(const MatrixGame& game, double scale, double shift) {
  Mat p = (scale * game.payoff()).array() + shift;
  return MatrixGame(std::move(p), 1e-9);
}

void write_payoff_csv(const MatrixGame& game, std::ostream& out) {
  out << "# rows=" << game.rows() << " cols=" << game.cols() << '\n';
  for (Eigen::Index i = 0; i < game.rows(); ++i) {
    for (Eigen::Index j = 0; j < game.cols(); ++j) {
      if (j) out << ',';
      out << format_double(game.payoff()(i, j));
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------

MixtureGameSpec build_mixture_game(int l, double radius,
                                   double precision_scale) {
  if (l < 1) throw InvariantError("mixture game needs l >= 1");
  if (!(radius > 0.0)) throw InvariantError("mixture game needs radius > 0");
  if (!(precision_scale > 0.0)) {
    throw InvariantError("mixture game needs precision_scale > 0");
  }
  MixtureGameSpec spec;
  spec.l = l;
  spec.radius = radius;
  spec.precision = precision_scale * Eigen::Matrix2d::Identity();
  const int k = 2 * l + 1;
  spec.centers.reserve(k);
  for (int i = 0; i < k; ++i) {
    const double angle = 2.0 * std::numbers::pi * i / k;
    spec.centers.emplace_back(radius * std::cos(angle),
                              radius * std::sin(angle));
  }
  spec.cyclic.resize(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      const int diff = ((j - i) % k + k) % k;
      spec.cyclic(i, j) = i == j ? 0 : (diff <= l ? 1 : -1);
    }
  }
  return spec;
}

Vec embed(const MixtureGameSpec& spec, const Point2& x) {
  const int k = spec.num_components();
  Vec pi(k);
  for (int i = 0; i < k; ++i) {
    const Point2 d = x - spec.centers[i];
    pi[i] = std::exp(-0.5 * d.dot(spec.precision * d));
  }
  return pi;
}

Eigen::MatrixX2d embed_jacobian(const MixtureGameSpec& spec, const Point2& x) {
  const int k = spec.num_components();
  const Eigen::Matrix2d sym = 0.5 * (spec.precision + spec.precision.transpose());
  Eigen::MatrixX2d jac(k, 2);
  for (int i = 0; i < k; ++i) {
    const Point2 d = x - spec.centers[i];
    const double pi = std::exp(-0.5 * d.dot(spec.precision * d));
    jac.row(i) = -pi * (sym * d).transpose();
  }
  return jac;
}

double mixture_payoff_embedded(const MixtureGameSpec& spec, const Vec& pi1,
                               const Vec& pi2) {
  require_same_size(pi1.size(), spec.num_components(), "mixture embedding");
  require_same_size(pi2.size(), spec.num_components(), "mixture embedding");
  return pi1.dot(spec.cyclic_real() * pi2) + (pi1.sum() - pi2.sum());
}

double mixture_payoff(const MixtureGameSpec& spec, const Point2& x1,
                      const Point2& x2) {
  return mixture_payoff_embedded(spec, embed(spec, x1), embed(spec, x2));
}

double mixture_payoff(const MixtureGameSpec& spec, const DiffPolicy& a,
                      const DiffPolicy& b) {
  return mixture_payoff_embedded(spec, a.embedding(), b.embedding());
}

Point2 mixture_payoff_grad(const MixtureGameSpec& spec, const Point2& x1,
                           const Point2& x2) {
  const Vec pi2 = embed(spec, x2);
  const Vec outer =
      spec.cyclic_real() * pi2 + Vec::Ones(spec.num_components());
  return embed_jacobian(spec, x1).transpose() * outer;
}

}  // namespace udiv
