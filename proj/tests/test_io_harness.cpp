#include <filesystem>
#include <fstream>
#include <locale>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "pmslow/errors.hpp"
#include "pmslow/harness.hpp"
#include "pmslow/io.hpp"

namespace pmslow {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("pmslow_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(-2.0), "-2");
  EXPECT_EQ(format_double(1.0 / 3.0), "0.3333333333333333");
  EXPECT_EQ(format_double(1e-300), "1e-300");
  EXPECT_EQ(format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
  for (double x : {0.7071067811865476, 3.141592653589793, 6.02214076e23}) {
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
}

TEST(FormatDouble, IgnoresGlobalLocale) {
  try {
    const std::locale old = std::locale::global(std::locale("de_DE.UTF-8"));
    EXPECT_EQ(format_double(0.5), "0.5");
    std::locale::global(old);
  } catch (const std::runtime_error&) {
    GTEST_SKIP() << "de_DE locale not installed";
  }
}

TEST(CsvWriter, PadsRows) {
  std::ostringstream out;
  CsvWriter csv(out, {"a", "b", "c"});
  csv.cell(1.5).cell(std::size_t{2});
  csv.end_row();
  csv.cell("x").empty().cell(0.25);
  csv.end_row();
  EXPECT_EQ(out.str(), "a,b,c\n1.5,2,\nx,,0.25\n");
}

TEST(Json, RoundTrip) {
  const PlateauFunction p(JumpSet({0.25, 0.6}), {0.0, 1.0, -0.5});
  EXPECT_EQ(plateau_function_from_json(to_json(p)), p);
  const GridFunction u({0.1, -0.2, 0.3});
  EXPECT_EQ(grid_function_from_json(to_json(u)), u);
  EXPECT_THROW(plateau_function_from_json("{\"jumps\": [0.5]}"), DomainError);
  EXPECT_THROW(grid_function_from_json("{\"n\": 2, \"values\": [1]}"), DomainError);
  EXPECT_THROW(grid_function_from_json("not json"), DomainError);
}

TEST(Experiment, Names) {
  for (auto e : {Experiment::kSimulateDiscrete, Experiment::kSimulateLimit, Experiment::kConverge,
                 Experiment::kAudits, Experiment::kGamma, Experiment::kSlope, Experiment::kWellPrep}) {
    EXPECT_EQ(parse_experiment(experiment_name(e)), e);
  }
  EXPECT_FALSE(parse_experiment("simulate").has_value());
}

TEST(RunConfig, Presets) {
  EXPECT_EQ(preset_names(), (std::vector<std::string>{"sym2", "sym3", "stair3"}));
  const RunConfig c = RunConfig::preset("stair3", Experiment::kSlope);
  ASSERT_TRUE(c.plateau.has_value());
  EXPECT_EQ(c.plateau->jump_count(), 2u);
  EXPECT_EQ(c.n_ladder, (std::vector<std::size_t>{64, 128, 256, 512}));
  EXPECT_NO_THROW(c.validate());
  EXPECT_THROW(RunConfig::preset("sym4", Experiment::kConverge), ConfigError);
}

TEST(RunConfig, FieldLevelErrors) {
  auto field_of = [](const std::string& text) {
    try {
      RunConfig::from_json(text, Experiment::kSimulateLimit).validate();
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(field_of(R"({"initial": {"jumps": [0.6, 0.4], "heights": [0, 1, 0]}})"), "initial.jumps");
  EXPECT_EQ(field_of(R"({"initial": {"jumps": [0.5], "heights": [0, 0]}})"), "initial.heights");
  EXPECT_EQ(field_of(R"({"preset": "sym2", "t_end": -1})"), "t_end");
  EXPECT_EQ(field_of(R"({"preset": "sym2", "integrator": {"scheme": "euler"}})"), "integrator.scheme");
  EXPECT_EQ(field_of(R"({"preset": "sym2", "integrator": {"theta": 0}})"), "integrator");
  EXPECT_EQ(field_of(R"({"preset": "sym2", "bogus": 1})"), "bogus");
  EXPECT_EQ(field_of(R"({"preset": "sym2", "n": 1})"), "n");
  EXPECT_EQ(field_of(R"({"initial": {"jumps": [0.3, 0.32], "heights": [0, 1, 0]}, "n": 8})"), "n");
  EXPECT_EQ(field_of("{"), "config");
  EXPECT_EQ(field_of(R"({"n": 8})"), "initial");
  EXPECT_EQ(field_of(R"({"preset": "sym2"})"), "<none>");
}

TEST_F(TempDir, ConfigErrorWritesNothing) {
  RunConfig c = RunConfig::preset("sym2", Experiment::kSimulateLimit);
  c.t_end = 0.0;
  const RunResult r = run(c, dir_);
  EXPECT_EQ(r.status, kExitConfigError);
  EXPECT_FALSE(fs::exists(dir_));
}

TEST_F(TempDir, SimulateLimitSym3) {
  const RunResult r = run(RunConfig::preset("sym3", Experiment::kSimulateLimit), dir_);
  EXPECT_EQ(r.status, kExitOk) << r.message;
  EXPECT_TRUE(r.passed);
  const std::string collisions = slurp(dir_ / "collisions.json");
  EXPECT_NE(collisions.find("\"merged_groups\""), std::string::npos);
  EXPECT_NE(slurp(dir_ / "summary.json").find("\"worst_slack\""), std::string::npos);
  EXPECT_NE(slurp(dir_ / "manifest.json").find("\"wall_time_s\""), std::string::npos);
  const std::string csv = slurp(dir_ / "limit.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,k,a_0,a_1,a_2");
}

TEST_F(TempDir, ByteIdenticalOutputs) {
  RunConfig c = RunConfig::from_json(R"({"preset": "sym2", "n": 32, "t_end": 0.1})", Experiment::kSimulateDiscrete);
  ASSERT_EQ(run(c, dir_ / "a", 1).status, kExitOk);
  ASSERT_EQ(run(c, dir_ / "b", 1).status, kExitOk);
  EXPECT_EQ(slurp(dir_ / "a" / "trajectory.csv"), slurp(dir_ / "b" / "trajectory.csv"));
  EXPECT_EQ(slurp(dir_ / "a" / "summary.json"), slurp(dir_ / "b" / "summary.json"));
}

TEST_F(TempDir, GammaSym2) {
  const RunResult r = run(RunConfig::preset("sym2", Experiment::kGamma), dir_);
  EXPECT_EQ(r.status, kExitOk);
  const std::string csv = slurp(dir_ / "gamma.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "n,k_energy,limit_energy,gap");
}

TEST_F(TempDir, AuditFailureStatus) {
  // The sampled slope bounds the limit slope from above on every rung.
  const RunResult r = run(RunConfig::preset("stair3", Experiment::kSlope), dir_);
  EXPECT_EQ(r.status, kExitOk);
  // Repeating a rung makes the strictly decreasing gap requirement fail.
  RunConfig c = RunConfig::from_json(R"({"preset": "sym2", "n_ladder": [64, 64]})", Experiment::kGamma);
  EXPECT_EQ(run(c, dir_ / "flat").status, kExitAuditFailed);
}

}  // namespace
}  // namespace pmslow
