#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <regex>
#include <sstream>

#include "udiv/config.hpp"
#include "udiv/io.hpp"

using namespace udiv;

namespace {

TomlDocument toml(const std::string& text) {
  std::istringstream in(text);
  return parse_toml(in);
}

ExperimentConfig experiment(const std::string& text) { return parse_experiment(toml(text), "."); }

std::size_t error_line(const std::string& text) {
  try {
    experiment(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

std::size_t count(const std::string& haystack, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string::npos;
       pos = haystack.find(needle, pos + 1)) {
    ++n;
  }
  return n;
}

// Every opened element is closed in order, or self-closing.
bool well_formed_xml(const std::string& text) {
  static const std::regex tag(R"(<(/?)([A-Za-z][\w:-]*)[^>]*?(/?)>)");
  std::vector<std::string> open;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), tag);
       it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    if (m[3] == "/") continue;
    if (m[1] == "/") {
      if (open.empty() || open.back() != m[2]) return false;
      open.pop_back();
    } else {
      open.push_back(m[2]);
    }
  }
  return open.empty() && text.find("<svg") != std::string::npos;
}

}  // namespace

TEST(Toml, ScalarsArraysAndComments) {
  const TomlDocument doc = toml(
      "top = 1\n"
      "[run] # trailing\n"
      "mode = \"psro\"\n"
      "seeds = [1, 2, 3]\n"
      "flag = true\n"
      "rate = -2.5e-1\n");
  EXPECT_EQ(std::get<std::int64_t>(doc.tables.at("").at("top").data), 1);
  const auto& run = doc.tables.at("run");
  EXPECT_EQ(std::get<std::string>(run.at("mode").data), "psro");
  EXPECT_EQ(std::get<TomlArray>(run.at("seeds").data).size(), 3u);
  EXPECT_TRUE(std::get<bool>(run.at("flag").data));
  EXPECT_EQ(std::get<double>(run.at("rate").data), -0.25);
  EXPECT_EQ(run.at("rate").line, 6u);
}

TEST(Toml, SyntaxErrorsCarryLineNumbers) {
  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      toml(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of("[run]\nmode = \"psro\n"), 2u);
  EXPECT_EQ(line_of("[run\n"), 1u);
  EXPECT_EQ(line_of("a = 1\na = 2\n"), 2u);
  EXPECT_EQ(line_of("[run]\nx = [1, 2\n"), 2u);
}

TEST(ExperimentConfig, DefaultsAndMixtureSettings) {
  const ExperimentConfig c = experiment(
      "[run]\nmode = \"psro_bd_rd\"\niterations = 50\nseeds = [0, 1, 2, 3, 4]\n"
      "[game]\nkind = \"mixture\"\n");
  EXPECT_EQ(c.mode, Mode::PsroBdRd);
  EXPECT_EQ(c.seeds.size(), 5u);
  EXPECT_EQ(c.game.kind, GameKind::Mixture);
  EXPECT_EQ(c.game.l, 4);
  EXPECT_EQ(c.oracle.learning_rate, 0.1);
  EXPECT_EQ(c.oracle.n_train, 5);
  EXPECT_EQ(c.lambda.lambda1, 1.0);
  EXPECT_EQ(c.lambda.lambda2, 1500.0);
  EXPECT_TRUE(c.lambda.decay);
  EXPECT_EQ(c.metrics.pe_iterations, 30);
}

TEST(ExperimentConfig, ModeZeroesDisabledWeights) {
  const ExperimentConfig c = experiment(
      "[run]\nmode = \"psro_bd\"\n[game]\nkind = \"mixture\"\n[lambda]\nlambda2 = 3.0\n");
  EXPECT_EQ(c.lambda.lambda2, 0.0);
  EXPECT_NO_THROW(build_run_config(c, 0).validate());
}

TEST(ExperimentConfig, ErrorsNameTheField) {
  EXPECT_THROW(experiment("[run]\nmode = \"psro\"\n"), ConfigError);
  EXPECT_EQ(error_line("[game]\nkind = \"matrix\"\n[run]\nmode = \"pipeline\"\n"), 4u);
  EXPECT_EQ(error_line("[game]\nkind = \"matrix\"\nbogus = 1\n"), 3u);
  EXPECT_EQ(error_line("[game]\nkind = \"mixture\"\nradius = -1.0\n"), 3u);
  EXPECT_EQ(error_line("[game]\n[run]\niterations = \"ten\"\n"), 3u);
  EXPECT_EQ(error_line("[game]\n[oracle]\nkind = \"exact\"\n[run]\nmode = \"psro_rd\"\n"), 3u);
  try {
    experiment("[game]\n[run]\niterations = 0\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("iterations"), std::string::npos);
  }
}

TEST(ExperimentConfig, SeedEnvironmentVariable) {
  ::setenv(kSeedEnvVar, "17", 1);
  EXPECT_EQ(experiment("[game]\n").seeds, std::vector<std::uint64_t>{17});
  EXPECT_EQ(experiment("[game]\n[run]\nseeds = [3]\n").seeds, std::vector<std::uint64_t>{3});
  ::setenv(kSeedEnvVar, "x", 1);
  EXPECT_THROW(experiment("[game]\n"), ConfigError);
  ::unsetenv(kSeedEnvVar);
  EXPECT_EQ(experiment("[game]\n").seeds, std::vector<std::uint64_t>{0});
}

TEST(ExperimentConfig, ResolvedTomlRoundTrips) {
  for (const char* text :
       {"[game]\nkind = \"mixture\"\n[run]\nmode = \"psro_rd\"\n",
        "[game]\nmatrix = \"synthetic\"\nsize = 12\ncycle_scale = 0.5\n[run]\nmode = "
        "\"psro_bd_rd\"\n[lambda]\nlambda1 = 0.25\nlambda2 = 0.75\n",
        "[game]\n[oracle]\nkind = \"exact\"\n[metrics]\nevery = 2\n"}) {
    const ExperimentConfig c = experiment(text);
    const std::string once = to_toml(c, 9);
    const ExperimentConfig back = experiment(once);
    EXPECT_EQ(to_toml(back, 9), once);
    EXPECT_EQ(back.seeds, std::vector<std::uint64_t>{9});
  }
}

TEST(RunCsv, RoundTripWithNan) {
  IterationRecord a;
  a.iteration = 1;
  a.pop_size_row = 2;
  a.pop_size_col = 2;
  a.exploitability = 0.1;
  a.pe = std::numeric_limits<double>::quiet_NaN();
  a.lambda1 = 1.0 / 3.0;
  a.restricted_value = -1e-17;
  std::ostringstream out;
  write_run_csv(out, {a, a});
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), kRunCsvHeader);
  EXPECT_EQ(text.find('\r'), std::string::npos);
  std::istringstream in(text);
  const auto back = read_run_csv(in);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].lambda1, a.lambda1);
  EXPECT_EQ(back[0].restricted_value, a.restricted_value);
  EXPECT_TRUE(std::isnan(back[0].pe));

  std::istringstream bad(std::string(kRunCsvHeader) + "\n1,2\n");
  EXPECT_THROW(read_run_csv(bad), ParseError);
}

TEST(TrajectoryCsv, RoundTrip) {
  const std::vector<TrajectoryPoint> pts{{1, 0, 0, 0.5, -1.25}, {1, 0, 1, 0.1, 3.0}};
  std::ostringstream out;
  write_trajectories_csv(out, pts);
  std::istringstream in(out.str());
  const auto back = read_trajectories_csv(in);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].y, -1.25);
  EXPECT_EQ(back[1].step, 1);
}

TEST(PopulationJson, RoundTripMatrixAndMixture) {
  FinalPopulation p;
  p.kind = GameKind::Matrix;
  p.shared = true;
  p.matrix[0] = {MixedStrategy::pure(3, 0), MixedStrategy::uniform(3)};
  p.nash = {MixedStrategy::uniform(2), MixedStrategy::uniform(2)};
  p.meta = Mat::Zero(2, 2);
  const FinalPopulation back = population_from_json(population_to_json(p));
  EXPECT_EQ(back.kind, GameKind::Matrix);
  EXPECT_TRUE(back.shared);
  EXPECT_EQ(back.matrix[0], p.matrix[0]);
  EXPECT_EQ(back.nash[0], p.nash[0]);

  FinalPopulation m;
  m.kind = GameKind::Mixture;
  m.shared = true;
  m.points[0] = {Point2(0.1, 0.2), Point2(-3.0, 1.0 / 3.0)};
  m.nash = {MixedStrategy::uniform(2), MixedStrategy::uniform(2)};
  m.meta = Mat::Zero(2, 2);
  const FinalPopulation mb = population_from_json(population_to_json(m));
  EXPECT_EQ(mb.points[0][1], m.points[0][1]);

  EXPECT_THROW(population_from_json("{"), ParseError);
}

TEST(Svg, CurvesHavePolylines) {
  RunConfig c;
  c.game.matrix = build_rps();
  c.iterations = 4;
  const RunLog log = run_psro(c);
  const std::string svg = curves_svg(log.records);
  EXPECT_TRUE(well_formed_xml(svg));
  EXPECT_GE(count(svg, "<polyline"), 1u);
}

TEST(Svg, TrajectoriesDrawNineCenters) {
  const MixtureGameSpec spec = build_mixture_game();
  const std::vector<TrajectoryPoint> pts{{1, 0, 0, 0.0, 0.0}, {1, 0, 1, 1.0, 1.0}};
  const std::string svg = trajectories_svg(spec, pts);
  EXPECT_TRUE(well_formed_xml(svg));
  EXPECT_EQ(count(svg, "class=\"center\""), 9u);
  EXPECT_GE(count(svg, "<polyline"), 1u);
}
