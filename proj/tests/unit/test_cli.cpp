#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "udiv/io.hpp"
#include "udiv_cli/commands.hpp"

using namespace udiv;
using namespace udiv::cli;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("udiv_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) const {
    const fs::path p = dir_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }

  static std::string read(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path rps_population(std::vector<MixedStrategy> members) const {
    FinalPopulation p;
    p.kind = GameKind::Matrix;
    p.shared = true;
    const auto n = static_cast<Eigen::Index>(members.size());
    p.matrix[0] = std::move(members);
    p.nash = {MixedStrategy::uniform(n), MixedStrategy::uniform(n)};
    p.meta = Mat::Zero(n, n);
    return write("population.json", population_to_json(p));
  }

  static double printed_pe(const std::string& text) {
    const auto pos = text.find("pe = ");
    if (pos == std::string::npos) return std::nan("");
    return std::stod(text.substr(pos + 5));
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

constexpr const char* kRpsConfig =
    "[run]\nmode = \"psro\"\niterations = 5\nseeds = [3]\n"
    "[game]\nkind = \"matrix\"\nmatrix = \"rps\"\n[oracle]\nkind = \"exact\"\n";

constexpr const char* kMixtureConfig =
    "[run]\nmode = \"psro_bd_rd\"\niterations = 3\nseeds = [1]\n"
    "[game]\nkind = \"mixture\"\n"
    "[metrics]\nevery = 3\npe_n = 0\nexpl_restarts = 1\nexpl_steps = 10\n";

}  // namespace

TEST_F(CliTest, RunWritesArtifactsAndRespectsForce) {
  RunOptions o{write("rps.toml", kRpsConfig), dir_ / "out", std::nullopt, false};
  ASSERT_EQ(cmd_run(o, out_, err_), kSuccess) << err_.str();
  for (const char* f : {"run.csv", "population.json", "resolved-config.toml"}) {
    EXPECT_TRUE(fs::exists(o.out_dir / f)) << f;
  }
  EXPECT_FALSE(fs::exists(o.out_dir / "trajectories.csv"));
  std::istringstream csv(read(o.out_dir / "run.csv"));
  const auto records = read_run_csv(csv);
  ASSERT_EQ(records.size(), 5u);
  EXPECT_LT(records.back().exploitability, 0.05);

  EXPECT_EQ(cmd_run(o, out_, err_), kUsageError);
  o.force = true;
  EXPECT_EQ(cmd_run(o, out_, err_), kSuccess);
}

TEST_F(CliTest, RunIsBitIdenticalAndResolvedConfigReproduces) {
  const fs::path cfg = write("mix.toml", kMixtureConfig);
  ASSERT_EQ(cmd_run({cfg, dir_ / "a", std::nullopt, false}, out_, err_), kSuccess) << err_.str();
  ASSERT_EQ(cmd_run({cfg, dir_ / "b", std::nullopt, false}, out_, err_), kSuccess);
  EXPECT_EQ(read(dir_ / "a" / "run.csv"), read(dir_ / "b" / "run.csv"));
  ASSERT_EQ(cmd_run({dir_ / "a" / "resolved-config.toml", dir_ / "c", std::nullopt, false},
                    out_, err_),
            kSuccess);
  EXPECT_EQ(read(dir_ / "a" / "run.csv"), read(dir_ / "c" / "run.csv"));
  std::istringstream traj(read(dir_ / "a" / "trajectories.csv"));
  EXPECT_EQ(read_trajectories_csv(traj).size(), 3u * 5u);
}

TEST_F(CliTest, RunConfigErrors) {
  EXPECT_EQ(cmd_run({write("nogame.toml", "[run]\nmode = \"psro\"\n"), dir_ / "o",
                     std::nullopt, false},
                    out_, err_),
            kUsageError);
  EXPECT_EQ(cmd_run({dir_ / "absent.toml", dir_ / "o", std::nullopt, false}, out_, err_),
            kUsageError);
  err_.str("");
  EXPECT_EQ(cmd_run({write("bad.toml", "[game]\n[run]\nmode = 7\n"), dir_ / "o",
                     std::nullopt, false},
                    out_, err_),
            kUsageError);
  EXPECT_NE(err_.str().find("mode"), std::string::npos);
}

TEST_F(CliTest, SeedOverrideChangesOutputDirectoryContents) {
  const fs::path cfg = write("rps.toml", kRpsConfig);
  ASSERT_EQ(cmd_run({cfg, dir_ / "s5", 5, false}, out_, err_), kSuccess);
  EXPECT_NE(read(dir_ / "s5" / "resolved-config.toml").find("seeds = [5]"), std::string::npos);
}

TEST_F(CliTest, ExactPeExamples) {
  const fs::path cfg = write("rps.toml", kRpsConfig);
  PeOptions o;
  o.config = cfg;
  o.population = rps_population(
      {MixedStrategy::pure(3, 0), MixedStrategy::pure(3, 1), MixedStrategy::pure(3, 2)});
  ASSERT_EQ(cmd_pe(o, out_, err_), kSuccess) << err_.str();
  EXPECT_NEAR(printed_pe(out_.str()), 0.0, 1e-12) << out_.str();
  EXPECT_TRUE(fs::exists(dir_ / "pe.csv"));

  out_.str("");
  o.population = rps_population({MixedStrategy::pure(3, 0)});
  ASSERT_EQ(cmd_pe(o, out_, err_), kSuccess);
  EXPECT_NEAR(printed_pe(out_.str()), -1.0, 1e-12) << out_.str();

  o.mode = "zero";
  EXPECT_EQ(cmd_pe(o, out_, err_), kUsageError);
}

TEST_F(CliTest, MixturePeRequiresOpponentStrength) {
  const fs::path cfg = write("mix.toml", kMixtureConfig);
  ASSERT_EQ(cmd_run({cfg, dir_ / "run", std::nullopt, false}, out_, err_), kSuccess);
  PeOptions o;
  o.config = cfg;
  o.population = dir_ / "run" / "population.json";
  EXPECT_EQ(cmd_pe(o, out_, err_), kUsageError);

  o.mode = "5";
  o.seed = 2;
  std::ostringstream first, second;
  ASSERT_EQ(cmd_pe(o, first, err_), kSuccess) << err_.str();
  ASSERT_EQ(cmd_pe(o, second, err_), kSuccess);
  EXPECT_EQ(first.str(), second.str());
  EXPECT_TRUE(std::isfinite(printed_pe(first.str())));
}

TEST_F(CliTest, EvalPrintsMetrics) {
  const fs::path cfg = write("rps.toml", kRpsConfig);
  ASSERT_EQ(cmd_run({cfg, dir_ / "run", std::nullopt, false}, out_, err_), kSuccess);
  std::ostringstream out;
  ASSERT_EQ(cmd_eval({dir_ / "run" / "population.json", cfg}, out, err_), kSuccess);
  EXPECT_NE(out.str().find("exploitability = "), std::string::npos);
  EXPECT_NE(out.str().find("pe = "), std::string::npos);
  EXPECT_EQ(cmd_eval({dir_ / "missing.json", cfg}, out, err_), kUsageError);
}

TEST_F(CliTest, GenMetaWritesParseableCsv) {
  GenMetaOptions o;
  o.size = 6;
  o.seed = 4;
  o.out = dir_ / "meta.csv";
  ASSERT_EQ(cmd_gen_meta(o, out_, err_), kSuccess);
  std::istringstream in(read(o.out));
  const MatrixGame g = parse_payoff_csv(in);
  EXPECT_EQ(g.rows(), 6);
  EXPECT_TRUE(g.symmetric());
  o.size = 1;
  EXPECT_EQ(cmd_gen_meta(o, out_, err_), kUsageError);
}

TEST_F(CliTest, PlotCurvesAndTrajectories) {
  const fs::path mix = write("mix.toml", kMixtureConfig);
  ASSERT_EQ(cmd_run({mix, dir_ / "mix", std::nullopt, false}, out_, err_), kSuccess);
  ASSERT_EQ(cmd_plot({dir_ / "mix", "curves", {}}, out_, err_), kSuccess) << err_.str();
  EXPECT_NE(read(dir_ / "mix" / "curves.svg").find("<polyline"), std::string::npos);
  ASSERT_EQ(cmd_plot({dir_ / "mix", "trajectories", {}}, out_, err_), kSuccess);
  const std::string svg = read(dir_ / "mix" / "trajectories.svg");
  std::size_t centers = 0;
  for (auto pos = svg.find("class=\"center\""); pos != std::string::npos;
       pos = svg.find("class=\"center\"", pos + 1)) {
    ++centers;
  }
  EXPECT_EQ(centers, 9u);

  const fs::path rps = write("rps.toml", kRpsConfig);
  ASSERT_EQ(cmd_run({rps, dir_ / "rps", std::nullopt, false}, out_, err_), kSuccess);
  EXPECT_EQ(cmd_plot({dir_ / "rps", "trajectories", {}}, out_, err_), kUsageError);
  EXPECT_EQ(cmd_plot({dir_ / "rps", "histogram", {}}, out_, err_), kUsageError);
}

TEST_F(CliTest, PlotRejectsEmptyRunCsv) {
  fs::create_directories(dir_ / "empty");
  write("empty/run.csv", "");
  EXPECT_EQ(cmd_plot({dir_ / "empty", "curves", {}}, out_, err_), kUsageError);
  write("empty/run.csv", std::string(kRunCsvHeader) + "\n");
  EXPECT_EQ(cmd_plot({dir_ / "empty", "curves", {}}, out_, err_), kUsageError);
  EXPECT_EQ(cmd_plot({dir_ / "nowhere", "curves", {}}, out_, err_), kUsageError);
}

TEST_F(CliTest, ArgumentParsing) {
  auto call = [](std::vector<std::string> args) {
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return main_entry(static_cast<int>(argv.size()), argv.data());
  };
  EXPECT_EQ(call({"udiv"}), kUsageError);
  EXPECT_EQ(call({"udiv", "frobnicate"}), kUsageError);
  EXPECT_EQ(call({"udiv", "run"}), kUsageError);
  EXPECT_EQ(call({"udiv", "--help"}), kSuccess);
  const fs::path cfg = write("rps.toml", kRpsConfig);
  EXPECT_EQ(call({"udiv", "run", cfg.string(), "-o", (dir_ / "argv").string(), "--seed", "2"}),
            kSuccess);
  EXPECT_TRUE(fs::exists(dir_ / "argv" / "run.csv"));
}
