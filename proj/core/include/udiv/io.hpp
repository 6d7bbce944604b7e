#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "udiv/games.hpp"
#include "udiv/psro.hpp"

namespace udiv {

inline constexpr const char* kRunCsvHeader =
    "iteration,pop_size_row,pop_size_col,exploitability,pe,lambda1,lambda2,"
    "restricted_value,elapsed_ms";
inline constexpr const char* kTrajectoryCsvHeader = "iteration,player,step,x,y";

// LF line endings, '.' decimals, shortest round-trip numbers, NaN as "nan".
void write_run_csv(std::ostream& out, const std::vector<IterationRecord>& records);
std::vector<IterationRecord> read_run_csv(std::istream& in);

void write_trajectories_csv(std::ostream& out,
                            const std::vector<TrajectoryPoint>& points);
std::vector<TrajectoryPoint> read_trajectories_csv(std::istream& in);

// Population file: game kind, shared flag, each player's policies and Nash
// weights, and the final meta-game.
std::string population_to_json(const FinalPopulation& population);
FinalPopulation population_from_json(const std::string& text);

// Metric curves against iteration, one polyline per metric with data.
std::string curves_svg(const std::vector<IterationRecord>& records);

// Gaussian centers (circles of radius 1, the visiting distance) and one
// polyline per player in the window [-(r + 2), r + 2]^2.
std::string trajectories_svg(const MixtureGameSpec& spec,
                             const std::vector<TrajectoryPoint>& points);

}  // namespace udiv
