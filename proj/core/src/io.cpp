#include "udiv/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "udiv/numfmt.hpp"

namespace udiv {

namespace {

using nlohmann::json;

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ParseError("invalid number '" + s + "'", line);
  }
  return v;
}

long parse_integer(const std::string& s, std::size_t line) {
  long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ParseError("invalid integer '" + s + "'", line);
  }
  return v;
}

// Reads rows of a headed CSV; the header must match exactly.
std::vector<std::vector<std::string>> read_rows(std::istream& in, const char* header,
                                                std::size_t columns) {
  std::string line;
  std::size_t n = 0;
  if (!std::getline(in, line)) throw ParseError("empty file", 0);
  ++n;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw ParseError("unexpected header", n);
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != columns) {
      throw ParseError("expected " + std::to_string(columns) + " columns", n);
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

void write_run_csv(std::ostream& out, const std::vector<IterationRecord>& records) {
  out << kRunCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.iteration << ',' << r.pop_size_row << ',' << r.pop_size_col << ','
        << format_double(r.exploitability) << ',' << format_double(r.pe) << ','
        << format_double(r.lambda1) << ',' << format_double(r.lambda2) << ','
        << format_double(r.restricted_value) << ',' << format_double(r.elapsed_ms)
        << '\n';
  }
}

std::vector<IterationRecord> read_run_csv(std::istream& in) {
  std::vector<IterationRecord> out;
  std::size_t line = 1;
  for (const auto& c : read_rows(in, kRunCsvHeader, 9)) {
    ++line;
    IterationRecord r;
    r.iteration = static_cast<int>(parse_integer(c[0], line));
    r.pop_size_row = parse_integer(c[1], line);
    r.pop_size_col = parse_integer(c[2], line);
    r.exploitability = parse_number(c[3], line);
    r.pe = parse_number(c[4], line);
    r.lambda1 = parse_number(c[5], line);
    r.lambda2 = parse_number(c[6], line);
    r.restricted_value = parse_number(c[7], line);
    r.elapsed_ms = parse_number(c[8], line);
    out.push_back(r);
  }
  return out;
}

void write_trajectories_csv(std::ostream& out,
                            const std::vector<TrajectoryPoint>& points) {
  out << kTrajectoryCsvHeader << '\n';
  for (const auto& p : points) {
    out << p.iteration << ',' << p.player << ',' << p.step << ',' << format_double(p.x)
        << ',' << format_double(p.y) << '\n';
  }
}

std::vector<TrajectoryPoint> read_trajectories_csv(std::istream& in) {
  std::vector<TrajectoryPoint> out;
  std::size_t line = 1;
  for (const auto& c : read_rows(in, kTrajectoryCsvHeader, 5)) {
    ++line;
    TrajectoryPoint p;
    p.iteration = static_cast<int>(parse_integer(c[0], line));
    p.player = static_cast<int>(parse_integer(c[1], line));
    p.step = static_cast<int>(parse_integer(c[2], line));
    p.x = parse_number(c[3], line);
    p.y = parse_number(c[4], line);
    out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json mat_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vec_json(m.row(i).transpose()));
  return rows;
}

Vec json_vec(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Mat json_mat(const json& j) {
  if (!j.is_array()) throw ParseError("expected a matrix", 0);
  if (j.empty()) return Mat();
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.at(0).size());
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Vec r = json_vec(j.at(static_cast<std::size_t>(i)));
    if (r.size() != cols) throw ParseError("ragged matrix", 0);
    m.row(i) = r.transpose();
  }
  return m;
}

GameKind parse_kind(const std::string& s) {
  if (s == "matrix") return GameKind::Matrix;
  if (s == "mixture") return GameKind::Mixture;
  if (s == "tabular") return GameKind::Tabular;
  throw ParseError("unknown game kind '" + s + "'", 0);
}

}  // namespace

std::string population_to_json(const FinalPopulation& p) {
  json root;
  root["game"] = std::string(to_string(p.kind));
  root["shared"] = p.shared;
  json players = json::array();
  const int count = p.shared ? 1 : 2;
  for (int i = 0; i < count; ++i) {
    json player;
    json policies = json::array();
    switch (p.kind) {
      case GameKind::Matrix:
        for (const auto& s : p.matrix[i]) policies.push_back(vec_json(s.weights()));
        break;
      case GameKind::Mixture:
        for (const auto& x : p.points[i]) policies.push_back({x.x(), x.y()});
        break;
      case GameKind::Tabular:
        for (const auto& t : p.tabular[i]) policies.push_back(mat_json(t.probs));
        break;
    }
    player["policies"] = std::move(policies);
    if (p.nash[i].size() > 0) player["nash"] = vec_json(p.nash[i].weights());
    players.push_back(std::move(player));
  }
  root["players"] = std::move(players);
  root["meta"] = mat_json(p.meta);
  return root.dump(2) + "\n";
}

FinalPopulation population_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), 0);
  }
  try {
    FinalPopulation p;
    p.kind = parse_kind(root.at("game").get<std::string>());
    p.shared = root.value("shared", false);
    const auto& players = root.at("players");
    if (players.empty() || players.size() > 2) {
      throw ParseError("expected one or two players", 0);
    }
    for (std::size_t i = 0; i < players.size(); ++i) {
      const auto& pl = players[i];
      for (const auto& pol : pl.at("policies")) {
        switch (p.kind) {
          case GameKind::Matrix:
            p.matrix[i].push_back(MixedStrategy(json_vec(pol)));
            break;
          case GameKind::Mixture: {
            const Vec v = json_vec(pol);
            if (v.size() != 2) throw ParseError("mixture policies are [x, y] points", 0);
            p.points[i].push_back(Point2(v[0], v[1]));
            break;
          }
          case GameKind::Tabular:
            p.tabular[i].push_back(TabularPolicy{json_mat(pol)});
            break;
        }
      }
      if (pl.contains("nash")) p.nash[i] = MixedStrategy(json_vec(pl.at("nash")));
    }
    if (players.size() == 1) p.shared = true;
    if (root.contains("meta")) p.meta = json_mat(root.at("meta"));
    return p;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed population file: ") + e.what(), 0);
  } catch (const InvariantError& e) {
    throw ParseError(std::string("malformed population file: ") + e.what(), 0);
  }
}

// ---------------------------------------------------------------------------

namespace {

std::string fmt(double v) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(2);
  ss << v;
  return ss.str();
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

}  // namespace

std::string curves_svg(const std::vector<IterationRecord>& records) {
  if (records.empty()) throw InvariantError("no records to plot");
  constexpr double kW = 640, kH = 400, kLeft = 60, kRight = 140, kTop = 20, kBottom = 40;
  struct Series {
    const char* name;
    double IterationRecord::*field;
  };
  const Series series[] = {{"exploitability", &IterationRecord::exploitability},
                           {"pe", &IterationRecord::pe},
                           {"restricted_value", &IterationRecord::restricted_value}};
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : series) {
    for (const auto& r : records) {
      const double v = r.*(s.field);
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  if (!std::isfinite(lo)) lo = hi = 0.0;
  if (hi - lo < 1e-12) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double x0 = records.front().iteration;
  const double x1 = std::max(records.back().iteration, records.front().iteration + 1);
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * (kW - kLeft - kRight); };
  auto py = [&](double y) { return kTop + (hi - y) / (hi - lo) * (kH - kTop - kBottom); };

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\""
      << kH << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kH - kBottom << "\" x2=\"" << kW - kRight
      << "\" y2=\"" << kH - kBottom << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kH - kBottom << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << (kW - kRight + kLeft) / 2 << "\" y=\"" << kH - 8
      << "\" text-anchor=\"middle\" font-size=\"12\">iteration</text>\n"
      << "<text x=\"" << kLeft - 6 << "\" y=\"" << kTop + 4
      << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(hi) << "</text>\n"
      << "<text x=\"" << kLeft - 6 << "\" y=\"" << kH - kBottom
      << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(lo) << "</text>\n";
  int legend = 0;
  for (std::size_t k = 0; k < std::size(series); ++k) {
    std::ostringstream pts;
    bool any = false;
    for (const auto& r : records) {
      const double v = r.*(series[k].field);
      if (!std::isfinite(v)) continue;
      pts << (any ? " " : "") << fmt(px(r.iteration)) << ',' << fmt(py(v));
      any = true;
    }
    if (!any) continue;
    out << "<polyline class=\"" << series[k].name << "\" fill=\"none\" stroke=\""
        << kColors[k] << "\" stroke-width=\"2\" points=\"" << pts.str() << "\"/>\n";
    out << "<text x=\"" << kW - kRight + 10 << "\" y=\"" << kTop + 16 * (legend + 1)
        << "\" fill=\"" << kColors[k] << "\" font-size=\"12\">" << series[k].name
        << "</text>\n";
    ++legend;
  }
  out << "</svg>\n";
  return out.str();
}

std::string trajectories_svg(const MixtureGameSpec& spec,
                             const std::vector<TrajectoryPoint>& points) {
  constexpr double kSize = 600;
  const double half = spec.radius + 2.0;
  auto px = [&](double x) { return (x + half) / (2.0 * half) * kSize; };
  auto py = [&](double y) { return (half - y) / (2.0 * half) * kSize; };
  const double unit = kSize / (2.0 * half);

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\""
      << kSize << "\" viewBox=\"0 0 " << kSize << ' ' << kSize << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"10\" y=\"20\" font-size=\"12\">r = " << format_double(spec.radius)
      << ", " << spec.num_components() << " Gaussians</text>\n";
  for (const auto& c : spec.centers) {
    out << "<circle class=\"center\" cx=\"" << fmt(px(c.x())) << "\" cy=\""
        << fmt(py(c.y())) << "\" r=\"" << fmt(unit) << "\" fill=\"#eeeeee\" "
        << "stroke=\"#888888\"/>\n";
  }
  std::map<int, std::vector<const TrajectoryPoint*>> by_player;
  for (const auto& p : points) by_player[p.player].push_back(&p);
  for (const auto& [player, pts] : by_player) {
    std::ostringstream coords;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      coords << (i ? " " : "") << fmt(px(pts[i]->x)) << ',' << fmt(py(pts[i]->y));
    }
    out << "<polyline class=\"player-" << player << "\" fill=\"none\" stroke=\""
        << kColors[static_cast<std::size_t>(player) % std::size(kColors)]
        << "\" stroke-width=\"1.5\" points=\"" << coords.str() << "\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace udiv
