#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "udiv/games.hpp"
#include "udiv/metagame.hpp"
#include "udiv/metrics.hpp"
#include "udiv/oracles.hpp"
#include "udiv/tabular.hpp"

namespace udiv {

enum class Mode { SelfPlay, Psro, PsroBd, PsroRd, PsroBdRd };

std::string_view to_string(Mode mode);
std::optional<Mode> parse_mode(std::string_view name);
bool uses_behavioral(Mode mode);
bool uses_response(Mode mode);

enum class GameKind { Matrix, Mixture, Tabular };
std::string_view to_string(GameKind kind);

// Matrix-game oracle: diversity-regularized mixing or an exact pure best response.
enum class MatrixOracleKind { Mixing, Exact };

struct GameHandle {
  GameKind kind = GameKind::Matrix;
  std::optional<MatrixGame> matrix;
  std::optional<MixtureGameSpec> mixture;
  std::optional<TabularMG> tabular;

  // Symmetric games keep a single shared population.
  bool shared_population() const;
};

struct MetricsConfig {
  int every = 1;               // metric cadence; the last iteration is always measured
  int pe_n = 10;               // PE(n) opponent strength for the mixture game, 0 = off
  int pe_iterations = 30;      // PE(n) adversary iterations
  int expl_restarts = 8;
  int expl_steps = 200;
  int meta_iterations = kMetaSolverIterations;
  int pe_meta_iterations = kPeSolverIterations;
};

struct RunConfig {
  GameHandle game;
  Mode mode = Mode::Psro;
  std::optional<Mode> col_mode;  // column player of an asymmetric game
  int iterations = 10;
  MatrixOracleKind matrix_oracle = MatrixOracleKind::Mixing;
  OracleParams oracle = OracleParams::matrix_defaults();
  TabularOracleParams tabular;
  LambdaSchedule lambda;
  std::uint64_t seed = 0;
  MetricsConfig metrics;
  bool record_timing = false;

  Mode mode_for(int player) const {
    return player == 1 && col_mode ? *col_mode : mode;
  }
  // Throws InvariantError on T < 1, missing game data, or a mode whose
  // disabled diversity weight is nonzero.
  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  long pop_size_row = 0;
  long pop_size_col = 0;
  double exploitability = 0.0;  // NaN when not measured this iteration
  double pe = 0.0;              // NaN when not measured or undefined
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double restricted_value = 0.0;
  double elapsed_ms = 0.0;
};

struct TrajectoryPoint {
  int iteration = 0;
  int player = 0;
  int step = 0;
  double x = 0.0;
  double y = 0.0;
};

// Final populations and their restricted Nash weights. Only the vectors for
// the run's game kind are filled; shared populations appear once as player 0.
struct FinalPopulation {
  GameKind kind = GameKind::Matrix;
  bool shared = false;
  std::array<std::vector<MixedStrategy>, 2> matrix;
  std::array<std::vector<Point2>, 2> points;
  std::array<std::vector<TabularPolicy>, 2> tabular;
  std::array<MixedStrategy, 2> nash;
  Mat meta;
};

struct RunLog {
  std::vector<IterationRecord> records;
  std::vector<TrajectoryPoint> trajectories;
  FinalPopulation population;
};

class RunError : public std::runtime_error {
 public:
  RunError(int iteration, const std::string& cause)
      : std::runtime_error("iteration " + std::to_string(iteration) + ": " + cause),
        iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

// Iteration 0 seeds each population with one random policy; iterations
// 1..T each solve the meta-game, add one oracle response per population and
// log a record.
RunLog run_psro(const RunConfig& config);

// Both players' aggregates under the restricted Nash of the table.
std::pair<MixedStrategy, MixedStrategy> nash_aggregated_profile(
    const PayoffTable<MixedStrategy>& table, int iterations = kMetaSolverIterations);
std::pair<MixedStrategy, MixedStrategy> nash_aggregated_profile(
    const SymmetricPayoffTable<MixedStrategy>& table,
    int iterations = kMetaSolverIterations);

}  // namespace udiv
