#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "udiv/psro.hpp"
#include "udiv/types.hpp"

namespace udiv {

// ---------------------------------------------------------------------------
// TOML subset: [tables], key = value, strings, integers, floats, booleans and
// single-line arrays of scalars. Comments start with '#'.

using TomlScalar = std::variant<bool, std::int64_t, double, std::string>;
using TomlArray = std::vector<TomlScalar>;

struct TomlValue {
  std::variant<bool, std::int64_t, double, std::string, TomlArray> data;
  std::size_t line = 0;
};

struct TomlDocument {
  // Table name ("" for keys before the first header) -> key -> value.
  std::map<std::string, std::map<std::string, TomlValue>> tables;
  std::map<std::string, std::size_t> table_lines;
};

TomlDocument parse_toml(std::istream& in);

// Invalid configuration; the message names the table and key.
class ConfigError : public ParseError {
 public:
  using ParseError::ParseError;
};

// ---------------------------------------------------------------------------

struct GameSource {
  GameKind kind = GameKind::Matrix;
  // Matrix games.
  std::string matrix = "rps";  // rps | csv | synthetic
  std::string path;            // csv payoffs or tabular game file
  int size = 30;
  double skill_scale = 1.0;
  double cycle_scale = 1.0;
  std::uint64_t game_seed = 0;
  double rescale = 1.0;
  double shift = 0.0;
  // Mixture game.
  int l = 4;
  double radius = 5.0;
  double precision = 0.5;
};

struct ExperimentConfig {
  GameSource game;
  Mode mode = Mode::Psro;
  std::optional<Mode> col_mode;
  int iterations = 10;
  std::vector<std::uint64_t> seeds{0};
  bool record_timing = false;
  MatrixOracleKind matrix_oracle = MatrixOracleKind::Mixing;
  OracleParams oracle;
  TabularOracleParams tabular;
  LambdaSchedule lambda;
  MetricsConfig metrics;
};

inline constexpr const char* kSeedEnvVar = "UDIV_SEED";

// Validates keys and values and fills game-dependent defaults. Relative game
// paths resolve against `base_dir`. When [run] has no seeds, UDIV_SEED (if
// set) provides the single default seed. Disabled diversity weights are
// zeroed for the chosen mode.
ExperimentConfig parse_experiment(const TomlDocument& doc,
                                  const std::filesystem::path& base_dir);
ExperimentConfig load_experiment(const std::filesystem::path& path);

// Fully explicit TOML for one seed; parsing it yields the same run.
std::string to_toml(const ExperimentConfig& config, std::uint64_t seed);

GameHandle build_game(const GameSource& source);
RunConfig build_run_config(const ExperimentConfig& config, std::uint64_t seed);

std::optional<IntrinsicMode> parse_intrinsic(std::string_view name);
std::string_view to_string(IntrinsicMode mode);

}  // namespace udiv
