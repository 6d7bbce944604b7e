#include "udiv_cli/commands.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "udiv/config.hpp"
#include "udiv/io.hpp"
#include "udiv/metrics.hpp"
#include "udiv/numfmt.hpp"
#include "udiv/psro.hpp"

namespace udiv::cli {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Exceptions that point at bad input rather than a failed computation.
bool is_usage_error(const std::exception& e) {
  return dynamic_cast<const ParseError*>(&e) != nullptr ||
         dynamic_cast<const std::invalid_argument*>(&e) != nullptr;
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const RunError& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return is_usage_error(e) ? kUsageError : kRuntimeFailure;
  }
}

std::string records_to_csv(const std::vector<IterationRecord>& records) {
  std::ostringstream ss;
  write_run_csv(ss, records);
  return ss.str();
}

std::string trajectories_to_csv(const std::vector<TrajectoryPoint>& points) {
  std::ostringstream ss;
  write_trajectories_csv(ss, points);
  return ss.str();
}

struct LoadedPopulation {
  ExperimentConfig config;
  GameHandle game;
  FinalPopulation population;
};

LoadedPopulation load_population(const fs::path& population, const fs::path& config) {
  LoadedPopulation lp;
  lp.config = load_experiment(config);
  lp.game = build_game(lp.config.game);
  lp.population = population_from_json(read_file(population));
  if (lp.population.kind != lp.game.kind) {
    throw ParseError("population is for a " +
                         std::string(to_string(lp.population.kind)) +
                         " game but the config describes a " +
                         std::string(to_string(lp.game.kind)) + " game",
                     0);
  }
  return lp;
}

}  // namespace

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    ExperimentConfig config = load_experiment(opts.config);
    if (opts.seed) config.seeds = {*opts.seed};
    std::vector<fs::path> dirs;
    for (const auto seed : config.seeds) {
      dirs.push_back(config.seeds.size() > 1 ? opts.out_dir / ("seed-" + std::to_string(seed))
                                             : opts.out_dir);
      if (fs::exists(dirs.back() / "run.csv") && !opts.force) {
        err << "error: " << dirs.back().string()
            << " already holds a run; pass --force to overwrite\n";
        return static_cast<int>(kUsageError);
      }
    }
    std::vector<RunConfig> runs;
    for (const auto seed : config.seeds) runs.push_back(build_run_config(config, seed));
    for (const auto& rc : runs) rc.validate();

    for (std::size_t i = 0; i < runs.size(); ++i) {
      RunLog log;
      try {
        log = run_psro(runs[i]);
      } catch (const std::exception& e) {
        err << "error: seed " << runs[i].seed << ": " << e.what() << '\n';
        return static_cast<int>(kRuntimeFailure);
      }
      fs::create_directories(dirs[i]);
      write_file(dirs[i] / "run.csv", records_to_csv(log.records));
      if (runs[i].game.kind == GameKind::Mixture) {
        write_file(dirs[i] / "trajectories.csv", trajectories_to_csv(log.trajectories));
      }
      write_file(dirs[i] / "population.json", population_to_json(log.population));
      write_file(dirs[i] / "resolved-config.toml", to_toml(config, runs[i].seed));
      const auto& last = log.records.back();
      out << "seed " << runs[i].seed << ": " << log.records.size()
          << " iterations, exploitability " << format_double(last.exploitability)
          << ", pe " << format_double(last.pe) << " -> " << dirs[i].string() << '\n';
    }
    return static_cast<int>(kSuccess);
  });
}

int cmd_eval(const EvalOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const LoadedPopulation lp = load_population(opts.population, opts.config);
    const FinalPopulation& p = lp.population;
    const auto& metrics = lp.config.metrics;
    const int col = p.shared ? 0 : 1;
    double expl = 0.0;
    double pe = std::numeric_limits<double>::quiet_NaN();
    double value = 0.0;
    switch (lp.game.kind) {
      case GameKind::Matrix: {
        const MatrixGame& game = *lp.game.matrix;
        PayoffTable<MixedStrategy> table([&game](const MixedStrategy& a, const MixedStrategy& b) {
          return matrix_payoff(game, a, b);
        });
        for (const auto& s : p.matrix[0]) table.add_row(s);
        for (const auto& s : p.matrix[col]) table.add_col(s);
        const NashResult nash = fictitious_play(table.entries(), metrics.meta_iterations);
        value = nash.value;
        expl = exploitability_matrix(game, aggregate(p.matrix[0], nash.sigma_row),
                                     aggregate(p.matrix[col], nash.sigma_col));
        pe = pe_exact_matrix(game, p.matrix[0]).value;
        break;
      }
      case GameKind::Mixture: {
        const MixtureGameSpec& spec = *lp.game.mixture;
        std::array<std::vector<DiffPolicy>, 2> pols;
        for (int i = 0; i < 2; ++i) {
          for (const auto& x : p.points[i == 1 ? col : 0]) pols[i].emplace_back(spec, x);
        }
        PayoffTable<DiffPolicy> table([&spec](const DiffPolicy& a, const DiffPolicy& b) {
          return mixture_payoff(spec, a, b);
        });
        for (const auto& d : pols[0]) table.add_row(d);
        for (const auto& d : pols[1]) table.add_col(d);
        const NashResult nash = fictitious_play(table.entries(), metrics.meta_iterations);
        value = nash.value;
        ExploitabilityDiffParams ep;
        ep.restarts = metrics.expl_restarts;
        ep.steps = metrics.expl_steps;
        ep.seed = lp.config.seeds.front();
        ep.learning_rate = lp.config.oracle.learning_rate;
        expl = exploitability_diff(spec, {pols[0], nash.sigma_row}, {pols[1], nash.sigma_col}, ep)
                   .total;
        if (metrics.pe_n > 0) {
          pe = pe_n_mixture(spec, pols[0], metrics.pe_n, metrics.pe_iterations,
                            lp.config.seeds.front(), lp.config.oracle,
                            metrics.pe_meta_iterations)
                   .value;
        }
        break;
      }
      case GameKind::Tabular: {
        const TabularMG& mg = *lp.game.tabular;
        PayoffTable<TabularPolicy> table([&mg](const TabularPolicy& a, const TabularPolicy& b) {
          return player_return(mg, 0, a, b);
        });
        for (const auto& t : p.tabular[0]) table.add_row(t);
        for (const auto& t : p.tabular[col]) table.add_col(t);
        const NashResult nash = fictitious_play(table.entries(), metrics.meta_iterations);
        value = nash.value;
        expl = exploitability_tabular(mg, {p.tabular[0], nash.sigma_row},
                                      {p.tabular[col], nash.sigma_col}, lp.config.tabular,
                                      lp.config.seeds.front())
                   .total;
        break;
      }
    }
    const bool lower_bound = lp.game.kind != GameKind::Matrix;
    out << "restricted_value = " << format_double(value) << '\n'
        << "exploitability" << (lower_bound ? "_lower_bound" : "") << " = "
        << format_double(expl) << '\n'
        << "pe = " << format_double(pe) << '\n';
    return static_cast<int>(kSuccess);
  });
}

int cmd_pe(const PeOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opts.player != 0 && opts.player != 1) {
      err << "error: --player must be 0 or 1\n";
      return static_cast<int>(kUsageError);
    }
    if (opts.iterations < 1) {
      err << "error: --iterations must be >= 1\n";
      return static_cast<int>(kUsageError);
    }
    const bool exact = opts.mode == "exact";
    int n = 0;
    if (!exact) {
      const auto res = std::from_chars(opts.mode.data(), opts.mode.data() + opts.mode.size(), n);
      if (res.ec != std::errc() || res.ptr != opts.mode.data() + opts.mode.size() || n < 1) {
        err << "error: --mode must be 'exact' or a positive integer\n";
        return static_cast<int>(kUsageError);
      }
    }
    const LoadedPopulation lp = load_population(opts.population, opts.config);
    const FinalPopulation& p = lp.population;
    const int player = p.shared ? 0 : opts.player;
    const std::uint64_t seed = opts.seed.value_or(lp.config.seeds.front());

    PEResult result;
    switch (lp.game.kind) {
      case GameKind::Matrix: {
        const MatrixGame game =
            player == 0 ? *lp.game.matrix : column_player_game(*lp.game.matrix);
        if (exact) {
          result = pe_exact_matrix(game, p.matrix[player]);
        } else {
          result = pe_n_matrix(game, p.matrix[player], MatrixAdversaryParams{n, 0.5},
                               opts.iterations, seed, lp.config.metrics.pe_meta_iterations);
        }
        break;
      }
      case GameKind::Mixture: {
        if (exact) {
          err << "error: exact PE is defined only for matrix games; use --mode <n>\n";
          return static_cast<int>(kUsageError);
        }
        const MixtureGameSpec& spec = *lp.game.mixture;
        std::vector<DiffPolicy> pols;
        for (const auto& x : p.points[player]) pols.emplace_back(spec, x);
        result = pe_n_mixture(spec, pols, n, opts.iterations, seed, lp.config.oracle,
                              lp.config.metrics.pe_meta_iterations);
        break;
      }
      case GameKind::Tabular:
        err << "error: PE is not available for tabular Markov games\n";
        return static_cast<int>(kUsageError);
    }

    std::ostringstream csv;
    csv << "kind,index,value\n";
    csv << "pe,," << format_double(result.value) << '\n';
    for (Eigen::Index k = 0; k < result.alpha.size(); ++k) {
      csv << "alpha," << k << ',' << format_double(result.alpha[k]) << '\n';
    }
    const fs::path dir = opts.out_dir.empty() ? opts.population.parent_path() : opts.out_dir;
    if (!dir.empty()) fs::create_directories(dir);
    write_file(dir / "pe.csv", csv.str());

    out << "pe = " << format_double(result.value) << '\n' << "alpha =";
    for (Eigen::Index k = 0; k < result.alpha.size(); ++k) {
      out << ' ' << format_double(result.alpha[k]);
    }
    out << '\n';
    return static_cast<int>(kSuccess);
  });
}

int cmd_gen_meta(const GenMetaOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const MatrixGame game =
        gen_synthetic_metagame(opts.size, opts.skill_scale, opts.cycle_scale, opts.seed);
    if (opts.out.empty()) {
      write_payoff_csv(game, out);
    } else {
      if (opts.out.has_parent_path()) fs::create_directories(opts.out.parent_path());
      std::ostringstream ss;
      write_payoff_csv(game, ss);
      write_file(opts.out, ss.str());
    }
    return static_cast<int>(kSuccess);
  });
}

int cmd_plot(const PlotOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    fs::path target = opts.out;
    if (target.empty()) target = opts.run_dir / (opts.kind + ".svg");
    std::string svg;
    if (opts.kind == "curves") {
      const fs::path csv = opts.run_dir / "run.csv";
      if (!fs::exists(csv)) {
        err << "error: missing " << csv.string() << '\n';
        return static_cast<int>(kUsageError);
      }
      std::istringstream in(read_file(csv));
      const auto records = read_run_csv(in);
      if (records.empty()) {
        err << "error: " << csv.string() << " has no records\n";
        return static_cast<int>(kUsageError);
      }
      svg = curves_svg(records);
    } else if (opts.kind == "trajectories") {
      const fs::path csv = opts.run_dir / "trajectories.csv";
      const fs::path cfg = opts.run_dir / "resolved-config.toml";
      for (const auto& f : {csv, cfg}) {
        if (!fs::exists(f)) {
          err << "error: missing " << f.string() << '\n';
          return static_cast<int>(kUsageError);
        }
      }
      const ExperimentConfig config = load_experiment(cfg);
      if (config.game.kind != GameKind::Mixture) {
        err << "error: trajectories are only recorded for the mixture game\n";
        return static_cast<int>(kUsageError);
      }
      std::istringstream in(read_file(csv));
      const auto points = read_trajectories_csv(in);
      const MixtureGameSpec spec =
          build_mixture_game(config.game.l, config.game.radius, config.game.precision);
      svg = trajectories_svg(spec, points);
    } else {
      err << "error: --kind must be curves or trajectories\n";
      return static_cast<int>(kUsageError);
    }
    write_file(target, svg);
    out << target.string() << '\n';
    return static_cast<int>(kSuccess);
  });
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Unified behavioral and response diversity for population learning"};
  app.require_subcommand(1);

  RunOptions run;
  std::uint64_t run_seed = 0;
  auto* run_cmd = app.add_subcommand("run", "Run PSRO from a config file");
  run_cmd->add_option("config", run.config, "Experiment config (TOML)")->required();
  run_cmd->add_option("-o,--out", run.out_dir, "Output directory")->required();
  auto* run_seed_opt = run_cmd->add_option("--seed", run_seed, "Override the config seeds");
  run_cmd->add_flag("--force", run.force, "Overwrite an existing run directory");

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a saved population");
  eval_cmd->add_option("population", eval.population, "population.json")->required();
  eval_cmd->add_option("-c,--config", eval.config, "Config describing the game")->required();

  PeOptions pe;
  std::uint64_t pe_seed = 0;
  auto* pe_cmd = app.add_subcommand("pe", "Population effectivity of a saved population");
  pe_cmd->add_option("population", pe.population, "population.json")->required();
  pe_cmd->add_option("-c,--config", pe.config, "Config describing the game")->required();
  pe_cmd->add_option("--mode", pe.mode, "'exact' or opponent strength n")->capture_default_str();
  pe_cmd->add_option("--iterations", pe.iterations, "PE(n) adversary iterations")
      ->capture_default_str();
  pe_cmd->add_option("--player", pe.player, "Population holder (0 or 1)")->capture_default_str();
  auto* pe_seed_opt = pe_cmd->add_option("--seed", pe_seed, "Seed for PE(n)");
  pe_cmd->add_option("-o,--out", pe.out_dir, "Directory for pe.csv");

  GenMetaOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-meta", "Write a synthetic meta-game CSV");
  gen_cmd->add_option("--size", gen.size, "Number of strategies")->capture_default_str();
  gen_cmd->add_option("--skill", gen.skill_scale, "Transitive scale")->capture_default_str();
  gen_cmd->add_option("--cycle", gen.cycle_scale, "Cyclic scale")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  gen_cmd->add_option("-o,--out", gen.out, "Output CSV (stdout if omitted)");

  PlotOptions plot;
  auto* plot_cmd = app.add_subcommand("plot", "Render SVG plots of a run directory");
  plot_cmd->add_option("run_dir", plot.run_dir, "Run directory")->required();
  plot_cmd->add_option("--kind", plot.kind, "curves or trajectories")
      ->check(CLI::IsMember({"curves", "trajectories"}))
      ->capture_default_str();
  plot_cmd->add_option("-o,--out", plot.out, "Output SVG");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? static_cast<int>(kSuccess) : static_cast<int>(kUsageError);
  }

  if (*run_cmd) {
    if (*run_seed_opt) run.seed = run_seed;
    return cmd_run(run, std::cout, std::cerr);
  }
  if (*eval_cmd) return cmd_eval(eval, std::cout, std::cerr);
  if (*pe_cmd) {
    if (*pe_seed_opt) pe.seed = pe_seed;
    return cmd_pe(pe, std::cout, std::cerr);
  }
  if (*gen_cmd) return cmd_gen_meta(gen, std::cout, std::cerr);
  return cmd_plot(plot, std::cout, std::cerr);
}

}  // namespace udiv::cli
