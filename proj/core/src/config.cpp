#include "udiv/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "udiv/numfmt.hpp"

namespace udiv {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool is_bare_key(std::string_view key) {
  if (key.empty()) return false;
  for (char c : key) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) {
      return false;
    }
  }
  return true;
}

class ValueParser {
 public:
  ValueParser(std::string_view text, std::size_t line) : s_(text), line_(line) {}

  TomlValue parse() {
    TomlValue v;
    v.line = line_;
    skip_ws();
    if (peek() == '[') {
      ++pos_;
      TomlArray arr;
      skip_ws();
      if (peek() == ']') {
        ++pos_;
      } else {
        while (true) {
          arr.push_back(scalar());
          skip_ws();
          if (peek() == ',') {
            ++pos_;
            skip_ws();
            if (peek() == ']') {
              ++pos_;
              break;
            }
            continue;
          }
          if (peek() == ']') {
            ++pos_;
            break;
          }
          throw ParseError("expected ',' or ']' in array", line_);
        }
      }
      v.data = std::move(arr);
    } else {
      std::visit([&v](auto&& x) { v.data = x; }, scalar());
    }
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] != '#') {
      throw ParseError("unexpected text after value", line_);
    }
    return v;
  }

 private:
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  TomlScalar scalar() {
    skip_ws();
    if (peek() == '"') return string();
    std::size_t end = pos_;
    while (end < s_.size() && s_[end] != ',' && s_[end] != ']' && s_[end] != '#' &&
           s_[end] != ' ' && s_[end] != '\t') {
      ++end;
    }
    const std::string tok(s_.substr(pos_, end - pos_));
    pos_ = end;
    if (tok.empty()) throw ParseError("missing value", line_);
    if (tok == "true") return true;
    if (tok == "false") return false;
    const bool integral = tok.find_first_of(".eEni") == std::string::npos;
    const char* first = tok.data() + (tok[0] == '+' ? 1 : 0);
    const char* last = tok.data() + tok.size();
    if (integral) {
      std::int64_t iv = 0;
      const auto res = std::from_chars(first, last, iv);
      if (res.ec == std::errc() && res.ptr == last) return iv;
    } else {
      double dv = 0.0;
      const auto res = std::from_chars(first, last, dv);
      if (res.ec == std::errc() && res.ptr == last && std::isfinite(dv)) return dv;
    }
    throw ParseError("invalid value '" + tok + "'", line_);
  }

  std::string string() {
    ++pos_;
    std::string out;
    while (true) {
      if (pos_ >= s_.size()) throw ParseError("unterminated string", line_);
      const char c = s_[pos_++];
      if (c == '"') break;
      if (c == '\\') {
        if (pos_ >= s_.size()) throw ParseError("unterminated string", line_);
        const char e = s_[pos_++];
        switch (e) {
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          default: throw ParseError(std::string("unknown escape \\") + e, line_);
        }
      } else {
        out += c;
      }
    }
    return out;
  }

  std::string_view s_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

}  // namespace

TomlDocument parse_toml(std::istream& in) {
  TomlDocument doc;
  std::string current;
  doc.tables[current];
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string text = trim(raw);
    if (text.empty() || text[0] == '#') continue;
    if (text[0] == '[') {
      const auto close = text.find(']');
      if (close == std::string::npos) throw ParseError("unterminated table header", line);
      const std::string rest = trim(std::string_view(text).substr(close + 1));
      if (!rest.empty() && rest[0] != '#') {
        throw ParseError("unexpected text after table header", line);
      }
      current = trim(std::string_view(text).substr(1, close - 1));
      if (!is_bare_key(current)) throw ParseError("invalid table name", line);
      if (doc.table_lines.count(current)) {
        throw ParseError("duplicate table [" + current + "]", line);
      }
      doc.table_lines[current] = line;
      doc.tables[current];
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", line);
    const std::string key = trim(std::string_view(text).substr(0, eq));
    if (!is_bare_key(key)) throw ParseError("invalid key '" + key + "'", line);
    auto& table = doc.tables[current];
    if (table.count(key)) throw ParseError("duplicate key '" + key + "'", line);
    table[key] = ValueParser(std::string_view(text).substr(eq + 1), line).parse();
  }
  return doc;
}

// ---------------------------------------------------------------------------

std::optional<IntrinsicMode> parse_intrinsic(std::string_view name) {
  if (name == "prediction_error") return IntrinsicMode::PredictionError;
  if (name == "neg_log_occupancy") return IntrinsicMode::NegLogOccupancy;
  return std::nullopt;
}

std::string_view to_string(IntrinsicMode mode) {
  return mode == IntrinsicMode::PredictionError ? "prediction_error"
                                                : "neg_log_occupancy";
}

namespace {

std::string_view matrix_oracle_name(MatrixOracleKind k) {
  return k == MatrixOracleKind::Exact ? "exact" : "mixing";
}

class Reader {
 public:
  explicit Reader(const TomlDocument& doc) : doc_(doc) {}

  bool has_table(const std::string& t) const { return doc_.table_lines.count(t) > 0; }

  const TomlValue* find(const std::string& table, const std::string& key) {
    const auto t = doc_.tables.find(table);
    if (t == doc_.tables.end()) return nullptr;
    const auto k = t->second.find(key);
    if (k == t->second.end()) return nullptr;
    used_.insert(table + "." + key);
    return &k->second;
  }

  [[noreturn]] static void fail(const std::string& table, const std::string& key,
                                const std::string& msg, std::size_t line) {
    throw ConfigError("[" + table + "] " + key + ": " + msg, line);
  }

  void get(const std::string& table, const std::string& key, double& out) {
    if (const auto* v = find(table, key)) {
      if (const auto* d = std::get_if<double>(&v->data)) {
        out = *d;
      } else if (const auto* i = std::get_if<std::int64_t>(&v->data)) {
        out = static_cast<double>(*i);
      } else {
        fail(table, key, "expected a number", v->line);
      }
    }
  }

  void get(const std::string& table, const std::string& key, int& out) {
    if (const auto* v = find(table, key)) {
      const auto* i = std::get_if<std::int64_t>(&v->data);
      if (!i) fail(table, key, "expected an integer", v->line);
      out = static_cast<int>(*i);
    }
  }

  void get(const std::string& table, const std::string& key, std::uint64_t& out) {
    if (const auto* v = find(table, key)) {
      const auto* i = std::get_if<std::int64_t>(&v->data);
      if (!i || *i < 0) fail(table, key, "expected a non-negative integer", v->line);
      out = static_cast<std::uint64_t>(*i);
    }
  }

  void get(const std::string& table, const std::string& key, bool& out) {
    if (const auto* v = find(table, key)) {
      const auto* b = std::get_if<bool>(&v->data);
      if (!b) fail(table, key, "expected true or false", v->line);
      out = *b;
    }
  }

  void get(const std::string& table, const std::string& key, std::string& out) {
    if (const auto* v = find(table, key)) {
      const auto* s = std::get_if<std::string>(&v->data);
      if (!s) fail(table, key, "expected a string", v->line);
      out = *s;
    }
  }

  std::size_t line_of(const std::string& table, const std::string& key) const {
    const auto t = doc_.tables.find(table);
    if (t != doc_.tables.end()) {
      const auto k = t->second.find(key);
      if (k != t->second.end()) return k->second.line;
    }
    const auto l = doc_.table_lines.find(table);
    return l == doc_.table_lines.end() ? 0 : l->second;
  }

  void reject_unknown() const {
    for (const auto& [table, keys] : doc_.tables) {
      if (table.empty() && keys.empty()) continue;
      if (!known_tables().count(table)) {
        throw ConfigError("unknown table [" + table + "]",
                          doc_.table_lines.count(table) ? doc_.table_lines.at(table) : 0);
      }
      for (const auto& [key, value] : keys) {
        if (!used_.count(table + "." + key)) {
          throw ConfigError("[" + table + "] " + key + ": unknown key", value.line);
        }
      }
    }
  }

 private:
  static const std::set<std::string>& known_tables() {
    static const std::set<std::string> k{"run", "game", "oracle", "lambda", "metrics"};
    return k;
  }

  const TomlDocument& doc_;
  std::set<std::string> used_;
};

}  // namespace

ExperimentConfig parse_experiment(const TomlDocument& doc,
                                  const std::filesystem::path& base_dir) {
  Reader r(doc);
  ExperimentConfig c;
  if (!r.has_table("game")) throw ConfigError("missing [game] table", 0);

  // [game]
  std::string kind = "matrix";
  r.get("game", "kind", kind);
  if (kind == "matrix") {
    c.game.kind = GameKind::Matrix;
  } else if (kind == "mixture") {
    c.game.kind = GameKind::Mixture;
  } else if (kind == "tabular") {
    c.game.kind = GameKind::Tabular;
  } else {
    Reader::fail("game", "kind", "expected matrix, mixture or tabular",
                 r.line_of("game", "kind"));
  }
  auto& g = c.game;
  r.get("game", "matrix", g.matrix);
  r.get("game", "path", g.path);
  r.get("game", "size", g.size);
  r.get("game", "skill_scale", g.skill_scale);
  r.get("game", "cycle_scale", g.cycle_scale);
  r.get("game", "game_seed", g.game_seed);
  r.get("game", "rescale", g.rescale);
  r.get("game", "shift", g.shift);
  r.get("game", "l", g.l);
  r.get("game", "radius", g.radius);
  r.get("game", "precision", g.precision);
  auto bad = [&](const char* table, const char* key, const std::string& msg) {
    Reader::fail(table, key, msg, r.line_of(table, key));
  };
  if (g.kind == GameKind::Matrix) {
    if (g.matrix != "rps" && g.matrix != "csv" && g.matrix != "synthetic") {
      bad("game", "matrix", "expected rps, csv or synthetic");
    }
    if (g.matrix == "csv" && g.path.empty()) bad("game", "path", "required for csv payoffs");
    if (g.matrix == "synthetic" && g.size < 2) bad("game", "size", "must be >= 2");
    if (!std::isfinite(g.rescale) || g.rescale == 0.0) bad("game", "rescale", "must be nonzero");
  }
  if (g.kind == GameKind::Tabular && g.path.empty()) {
    bad("game", "path", "required for tabular games");
  }
  if (g.kind == GameKind::Mixture) {
    if (g.l < 1) bad("game", "l", "must be >= 1");
    if (!(g.radius > 0.0)) bad("game", "radius", "must be positive");
    if (!(g.precision > 0.0)) bad("game", "precision", "must be positive");
  }
  if (!g.path.empty()) {
    const std::filesystem::path p(g.path);
    g.path = (p.is_absolute() ? p : base_dir / p).lexically_normal().string();
  }

  // Game-dependent defaults.
  const bool mixture = g.kind == GameKind::Mixture;
  c.oracle = mixture ? OracleParams::differential_defaults()
                     : OracleParams::matrix_defaults();
  if (g.kind == GameKind::Tabular) c.oracle.learning_rate = c.tabular.learning_rate;
  c.lambda = mixture ? LambdaSchedule{1.0, 1500.0, true} : LambdaSchedule{0.2, 0.2, false};
  c.iterations = mixture ? 50 : 10;
  c.metrics.every = mixture ? 5 : 1;

  // [run]
  std::string mode = "psro";
  r.get("run", "mode", mode);
  const auto parsed_mode = parse_mode(mode);
  if (!parsed_mode) bad("run", "mode", "expected selfplay, psro, psro_bd, psro_rd or psro_bd_rd");
  c.mode = *parsed_mode;
  std::string col_mode;
  r.get("run", "mode_col", col_mode);
  if (!col_mode.empty()) {
    const auto m = parse_mode(col_mode);
    if (!m) bad("run", "mode_col", "expected a mode name");
    c.col_mode = *m;
  }
  r.get("run", "iterations", c.iterations);
  if (c.iterations < 1) bad("run", "iterations", "must be >= 1");
  r.get("run", "record_timing", c.record_timing);
  if (const auto* v = r.find("run", "seeds")) {
    c.seeds.clear();
    if (const auto* i = std::get_if<std::int64_t>(&v->data)) {
      if (*i < 0) bad("run", "seeds", "seeds must be non-negative");
      c.seeds.push_back(static_cast<std::uint64_t>(*i));
    } else if (const auto* arr = std::get_if<TomlArray>(&v->data)) {
      for (const auto& e : *arr) {
        const auto* i2 = std::get_if<std::int64_t>(&e);
        if (!i2 || *i2 < 0) bad("run", "seeds", "seeds must be non-negative integers");
        c.seeds.push_back(static_cast<std::uint64_t>(*i2));
      }
      if (c.seeds.empty()) bad("run", "seeds", "must not be empty");
    } else {
      bad("run", "seeds", "expected an integer or an array of integers");
    }
  } else if (const char* env = std::getenv(kSeedEnvVar); env && *env) {
    std::uint64_t s = 0;
    const std::string_view sv(env);
    const auto res = std::from_chars(sv.data(), sv.data() + sv.size(), s);
    if (res.ec != std::errc() || res.ptr != sv.data() + sv.size()) {
      throw ConfigError(std::string(kSeedEnvVar) + " is not a non-negative integer", 0);
    }
    c.seeds = {s};
  }

  // [oracle]
  std::string oracle_kind = "mixing";
  r.get("oracle", "kind", oracle_kind);
  if (oracle_kind == "mixing") {
    c.matrix_oracle = MatrixOracleKind::Mixing;
  } else if (oracle_kind == "exact") {
    c.matrix_oracle = MatrixOracleKind::Exact;
  } else {
    bad("oracle", "kind", "expected mixing or exact");
  }
  auto& o = c.oracle;
  r.get("oracle", "learning_rate", o.learning_rate);
  r.get("oracle", "improvement_threshold", o.improvement_threshold);
  r.get("oracle", "n_train", o.n_train);
  r.get("oracle", "adam_beta1", o.adam_beta1);
  r.get("oracle", "adam_beta2", o.adam_beta2);
  r.get("oracle", "adam_eps", o.adam_eps);
  r.get("oracle", "max_inner_loops", o.max_inner_loops);
  r.get("oracle", "normalize_embedding", o.normalize_embedding);
  r.get("oracle", "init_noise", o.init_noise);
  std::string divergence(to_string(o.divergence));
  r.get("oracle", "divergence", divergence);
  const auto div = parse_divergence(divergence);
  if (!div) bad("oracle", "divergence", "expected kl, reverse_kl, js, tv or hellinger");
  o.divergence = *div;
  auto& tb = c.tabular;
  tb.learning_rate = o.learning_rate;
  tb.adam_beta1 = o.adam_beta1;
  tb.adam_beta2 = o.adam_beta2;
  tb.adam_eps = o.adam_eps;
  r.get("oracle", "steps", tb.steps);
  r.get("oracle", "rd_steps", tb.rd_steps);
  r.get("oracle", "init_scale", tb.init_scale);
  r.get("oracle", "feature_dim", tb.feature_dim);
  std::string intrinsic(to_string(tb.intrinsic));
  r.get("oracle", "intrinsic", intrinsic);
  const auto im = parse_intrinsic(intrinsic);
  if (!im) bad("oracle", "intrinsic", "expected prediction_error or neg_log_occupancy");
  tb.intrinsic = *im;
  if (tb.steps < 0) bad("oracle", "steps", "must be >= 0");
  if (tb.rd_steps < 0) bad("oracle", "rd_steps", "must be >= 0");
  if (tb.feature_dim < 1) bad("oracle", "feature_dim", "must be >= 1");
  if (!(tb.init_scale >= 0.0)) bad("oracle", "init_scale", "must be >= 0");
  if (o.n_train < 1) bad("oracle", "n_train", "must be >= 1");
  if (!(o.learning_rate > 0.0)) bad("oracle", "learning_rate", "must be positive");
  if (g.kind == GameKind::Matrix && c.matrix_oracle == MatrixOracleKind::Mixing &&
      !(o.learning_rate < 1.0)) {
    bad("oracle", "learning_rate", "matrix mixing rate must lie in (0, 1)");
  }
  if (!(o.improvement_threshold > 0.0)) {
    bad("oracle", "improvement_threshold", "must be positive");
  }
  if (!(o.adam_beta1 >= 0.0 && o.adam_beta1 < 1.0)) bad("oracle", "adam_beta1", "must lie in [0, 1)");
  if (!(o.adam_beta2 >= 0.0 && o.adam_beta2 < 1.0)) bad("oracle", "adam_beta2", "must lie in [0, 1)");
  if (!(o.adam_eps > 0.0)) bad("oracle", "adam_eps", "must be positive");
  if (o.max_inner_loops < 1) bad("oracle", "max_inner_loops", "must be >= 1");
  if (!(o.init_noise >= 0.0)) bad("oracle", "init_noise", "must be >= 0");

  // [lambda]
  r.get("lambda", "lambda1", c.lambda.lambda1);
  r.get("lambda", "lambda2", c.lambda.lambda2);
  r.get("lambda", "decay", c.lambda.decay);
  if (!(c.lambda.lambda1 >= 0.0)) bad("lambda", "lambda1", "must be >= 0");
  if (!(c.lambda.lambda2 >= 0.0)) bad("lambda", "lambda2", "must be >= 0");
  bool any_bd = false;
  bool any_rd = false;
  for (int player = 0; player < 2; ++player) {
    const Mode m = player == 1 && c.col_mode ? *c.col_mode : c.mode;
    any_bd = any_bd || uses_behavioral(m);
    any_rd = any_rd || uses_response(m);
  }
  if (!any_bd) c.lambda.lambda1 = 0.0;
  if (!any_rd) c.lambda.lambda2 = 0.0;
  if (g.kind == GameKind::Matrix && c.matrix_oracle == MatrixOracleKind::Exact &&
      (any_bd || any_rd)) {
    bad("oracle", "kind", "the exact oracle only supports modes selfplay and psro");
  }

  // [metrics]
  auto& mt = c.metrics;
  r.get("metrics", "every", mt.every);
  r.get("metrics", "pe_n", mt.pe_n);
  r.get("metrics", "pe_iterations", mt.pe_iterations);
  r.get("metrics", "expl_restarts", mt.expl_restarts);
  r.get("metrics", "expl_steps", mt.expl_steps);
  r.get("metrics", "meta_iterations", mt.meta_iterations);
  r.get("metrics", "pe_meta_iterations", mt.pe_meta_iterations);
  if (mt.every < 1) bad("metrics", "every", "must be >= 1");
  if (mt.pe_n < 0) bad("metrics", "pe_n", "must be >= 0");
  if (mt.pe_iterations < 1) bad("metrics", "pe_iterations", "must be >= 1");
  if (mt.expl_restarts < 1) bad("metrics", "expl_restarts", "must be >= 1");
  if (mt.expl_steps < 0) bad("metrics", "expl_steps", "must be >= 0");
  if (mt.meta_iterations < 1) bad("metrics", "meta_iterations", "must be >= 1");
  if (mt.pe_meta_iterations < 1) bad("metrics", "pe_meta_iterations", "must be >= 1");

  r.reject_unknown();
  return c;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string(), 0);
  const TomlDocument doc = parse_toml(in);
  return parse_experiment(doc, path.parent_path());
}

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    if (ch == '\n') {
      out += "\\n";
      continue;
    }
    if (ch == '\t') {
      out += "\\t";
      continue;
    }
    out += ch;
  }
  return out + "\"";
}

// Floats always carry a '.' or exponent so they read back as floats.
std::string toml_float(double v) {
  std::string s = format_double(v);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

}  // namespace

std::string to_toml(const ExperimentConfig& c, std::uint64_t seed) {
  std::ostringstream out;
  out << "[run]\n";
  out << "mode = " << quote(std::string(to_string(c.mode))) << "\n";
  if (c.col_mode) out << "mode_col = " << quote(std::string(to_string(*c.col_mode))) << "\n";
  out << "iterations = " << c.iterations << "\n";
  out << "seeds = [" << seed << "]\n";
  out << "record_timing = " << (c.record_timing ? "true" : "false") << "\n\n";

  const auto& g = c.game;
  out << "[game]\n";
  out << "kind = " << quote(std::string(to_string(g.kind))) << "\n";
  switch (g.kind) {
    case GameKind::Matrix:
      out << "matrix = " << quote(g.matrix) << "\n";
      if (g.matrix == "csv") out << "path = " << quote(g.path) << "\n";
      if (g.matrix == "synthetic") {
        out << "size = " << g.size << "\n";
        out << "skill_scale = " << toml_float(g.skill_scale) << "\n";
        out << "cycle_scale = " << toml_float(g.cycle_scale) << "\n";
        out << "game_seed = " << g.game_seed << "\n";
      }
      out << "rescale = " << toml_float(g.rescale) << "\n";
      out << "shift = " << toml_float(g.shift) << "\n";
      break;
    case GameKind::Mixture:
      out << "l = " << g.l << "\n";
      out << "radius = " << toml_float(g.radius) << "\n";
      out << "precision = " << toml_float(g.precision) << "\n";
      break;
    case GameKind::Tabular:
      out << "path = " << quote(g.path) << "\n";
      break;
  }
  out << "\n";

  const auto& o = c.oracle;
  out << "[oracle]\n";
  if (g.kind == GameKind::Matrix) {
    out << "kind = " << quote(std::string(matrix_oracle_name(c.matrix_oracle))) << "\n";
  }
  out << "learning_rate = " << toml_float(o.learning_rate) << "\n";
  out << "improvement_threshold = " << toml_float(o.improvement_threshold) << "\n";
  out << "max_inner_loops = " << o.max_inner_loops << "\n";
  out << "n_train = " << o.n_train << "\n";
  out << "adam_beta1 = " << toml_float(o.adam_beta1) << "\n";
  out << "adam_beta2 = " << toml_float(o.adam_beta2) << "\n";
  out << "adam_eps = " << toml_float(o.adam_eps) << "\n";
  out << "divergence = " << quote(std::string(to_string(o.divergence))) << "\n";
  out << "normalize_embedding = " << (o.normalize_embedding ? "true" : "false") << "\n";
  out << "init_noise = " << toml_float(o.init_noise) << "\n";
  out << "steps = " << c.tabular.steps << "\n";
  out << "rd_steps = " << c.tabular.rd_steps << "\n";
  out << "init_scale = " << toml_float(c.tabular.init_scale) << "\n";
  out << "intrinsic = " << quote(std::string(to_string(c.tabular.intrinsic))) << "\n";
  out << "feature_dim = " << c.tabular.feature_dim << "\n\n";

  out << "[lambda]\n";
  out << "lambda1 = " << toml_float(c.lambda.lambda1) << "\n";
  out << "lambda2 = " << toml_float(c.lambda.lambda2) << "\n";
  out << "decay = " << (c.lambda.decay ? "true" : "false") << "\n\n";

  const auto& m = c.metrics;
  out << "[metrics]\n";
  out << "every = " << m.every << "\n";
  out << "pe_n = " << m.pe_n << "\n";
  out << "pe_iterations = " << m.pe_iterations << "\n";
  out << "expl_restarts = " << m.expl_restarts << "\n";
  out << "expl_steps = " << m.expl_steps << "\n";
  out << "meta_iterations = " << m.meta_iterations << "\n";
  out << "pe_meta_iterations = " << m.pe_meta_iterations << "\n";
  return out.str();
}

GameHandle build_game(const GameSource& s) {
  GameHandle h;
  h.kind = s.kind;
  switch (s.kind) {
    case GameKind::Matrix: {
      MatrixGame base;
      if (s.matrix == "rps") {
        base = build_rps();
      } else if (s.matrix == "csv") {
        base = load_payoff_csv(s.path);
      } else {
        base = gen_synthetic_metagame(s.size, s.skill_scale, s.cycle_scale, s.game_seed);
      }
      h.matrix = (s.rescale == 1.0 && s.shift == 0.0) ? base
                                                      : rescale(base, s.rescale, s.shift);
      break;
    }
    case GameKind::Mixture:
      h.mixture = build_mixture_game(s.l, s.radius, s.precision);
      break;
    case GameKind::Tabular:
      h.tabular = load_tabular_mg(s.path);
      break;
  }
  return h;
}

RunConfig build_run_config(const ExperimentConfig& c, std::uint64_t seed) {
  RunConfig rc;
  rc.game = build_game(c.game);
  rc.mode = c.mode;
  rc.col_mode = c.col_mode;
  rc.iterations = c.iterations;
  rc.matrix_oracle = c.matrix_oracle;
  rc.oracle = c.oracle;
  rc.tabular = c.tabular;
  rc.lambda = c.lambda;
  rc.seed = seed;
  rc.metrics = c.metrics;
  rc.record_timing = c.record_timing;
  return rc;
}

}  // namespace udiv
