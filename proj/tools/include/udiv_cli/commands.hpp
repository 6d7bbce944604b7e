#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace udiv::cli {

enum ExitCode : int { kSuccess = 0, kRuntimeFailure = 1, kUsageError = 2 };

struct RunOptions {
  std::filesystem::path config;
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;
  bool force = false;
};

struct EvalOptions {
  std::filesystem::path population;
  std::filesystem::path config;
};

struct PeOptions {
  std::filesystem::path population;
  std::filesystem::path config;
  std::string mode = "exact";  // "exact" or the opponent strength n
  int iterations = 30;
  int player = 0;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out_dir;
};

struct GenMetaOptions {
  int size = 30;
  double skill_scale = 1.0;
  double cycle_scale = 1.0;
  std::uint64_t seed = 0;
  std::filesystem::path out;
};

struct PlotOptions {
  std::filesystem::path run_dir;
  std::string kind = "curves";  // curves | trajectories
  std::filesystem::path out;    // defaults to <run_dir>/<kind>.svg
};

// Each command reports diagnostics on `err` and returns an ExitCode.
int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalOptions& opts, std::ostream& out, std::ostream& err);
int cmd_pe(const PeOptions& opts, std::ostream& out, std::ostream& err);
int cmd_gen_meta(const GenMetaOptions& opts, std::ostream& out, std::ostream& err);
int cmd_plot(const PlotOptions& opts, std::ostream& out, std::ostream& err);

// Parses argv with subcommands run, eval, pe, gen-meta and plot.
int main_entry(int argc, char** argv);

}  // namespace udiv::cli
