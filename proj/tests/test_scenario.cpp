#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "contactdyn/scenario.hpp"

namespace fs = std::filesystem;
using namespace contactdyn::scenario;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("contactdyn_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write(const fs::path& dir, const std::string& file, const std::string& text) {
  std::ofstream(dir / file) << text;
  return dir / file;
}

RunReport run_file(const fs::path& cfg, const fs::path& out) {
  RunOptions o;
  o.config_path = cfg.string();
  o.out_dir = out.string();
  o.quiet = true;
  return run(o);
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

const char* kFlow = R"(name = "tiny"
kind = "flow"
[model]
name = "reeb"
n = 1
[flow]
y0 = [1.0]
wp0 = [1.0]
step = 0.01
steps = 10
)";

}  // namespace

TEST(Scenario, RunsAndWritesReport) {
  const auto dir = scratch("ok");
  const auto r = run_file(write(dir, "a.toml", kFlow), dir / "out");
  EXPECT_EQ(r.exit_code, kOk) << r.message;
  EXPECT_TRUE(fs::exists(dir / "out" / "trajectory.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "plot.py"));
  const auto j = nlohmann::json::parse(slurp(dir / "out" / "report.json"));
  EXPECT_EQ(j["scenario"], "tiny");
  EXPECT_EQ(j["status"], "ok");
  EXPECT_EQ(j["config_hash"].get<std::string>().size(), 16u);
  EXPECT_TRUE(j.contains("wall_time_s"));
}

TEST(Scenario, UnknownKeyIsAValidationErrorNamingTheKey) {
  const auto dir = scratch("unknown");
  const auto r = run_file(write(dir, "a.toml", std::string(kFlow) + "stepz = 3\n"), dir / "out");
  EXPECT_EQ(r.exit_code, kValidation);
  EXPECT_NE(r.message.find("flow.stepz"), std::string::npos) << r.message;
  EXPECT_TRUE(fs::exists(dir / "out" / "report.json"));
}

TEST(Scenario, ParseErrorReportsLine) {
  const auto dir = scratch("parse");
  const auto r = run_file(write(dir, "a.toml", "name = \"x\"\nkind = flow\n"), dir / "out");
  EXPECT_EQ(r.exit_code, kValidation);
  EXPECT_NE(r.message.find("line 2"), std::string::npos) << r.message;
}

TEST(Scenario, BadValuesNameTheField) {
  const auto dir = scratch("bad");
  std::string cfg = kFlow;
  cfg.replace(cfg.find("step = 0.01"), 11, "step = -1.0");
  const auto r = run_file(write(dir, "a.toml", cfg), dir / "out");
  EXPECT_EQ(r.exit_code, kValidation);
  EXPECT_NE(r.message.find("flow.step"), std::string::npos);
  const auto r2 = run_file(write(dir, "b.toml", "name = \"x\"\nkind = \"warp\"\n"), dir / "out2");
  EXPECT_EQ(r2.exit_code, kValidation);
  EXPECT_NE(r2.message.find("kind"), std::string::npos);
}

TEST(Scenario, MissingTableFileIsAValidationError) {
  const auto dir = scratch("missing");
  const auto r = run_file(write(dir, "a.toml", R"(name = "e"
kind = "estimate"
[model]
kind = "table"
path = "nowhere.csv"
)"),
                          dir / "out");
  EXPECT_EQ(r.exit_code, kValidation);
  EXPECT_NE(r.message.find("model.path"), std::string::npos);
}

TEST(Scenario, FailedAssertionExitsThree) {
  const auto dir = scratch("assert");
  const auto r = run_file(write(dir, "a.toml", std::string(kFlow) + "[checks]\nclosed_form = true\nclosed_form_rel_tol = 1e-30\n"),
                          dir / "out");
  EXPECT_EQ(r.exit_code, kAssertion);
  EXPECT_EQ(r.status, "assertion_failed");
}

TEST(Scenario, DivergenceExitsFour) {
  const auto dir = scratch("diverge");
  const auto r = run_file(write(dir, "a.toml", R"(name = "boom"
kind = "flow"
[model]
name = "quadratic_field"
n = 1
a = 1.0
[flow]
y0 = [10.0]
wp0 = [10.0]
step = 0.5
steps = 200
)"),
                          dir / "out");
  EXPECT_EQ(r.exit_code, kDivergence) << r.message;
  EXPECT_TRUE(fs::exists(dir / "out" / "report.json"));
}

TEST(Scenario, SubcommandMustMatchKind) {
  const auto dir = scratch("mismatch");
  RunOptions o;
  o.config_path = write(dir, "a.toml", kFlow).string();
  o.out_dir = (dir / "out").string();
  o.expected_kind = "kinetic";
  o.quiet = true;
  EXPECT_EQ(run(o).exit_code, kValidation);
}

TEST(Scenario, OutputDirectoryPrecedence) {
  const auto dir = scratch("env");
  const auto cfg = write(dir, "a.toml", kFlow);
  ::setenv(kOutDirEnv, (dir / "from_env").string().c_str(), 1);
  RunOptions o;
  o.config_path = cfg.string();
  o.quiet = true;
  const auto r = run(o);
  EXPECT_EQ(fs::path(r.out_dir), dir / "from_env" / "tiny");
  EXPECT_TRUE(fs::exists(dir / "from_env" / "tiny" / "report.json"));
  o.out_dir = (dir / "flag").string();
  EXPECT_EQ(run(o).out_dir, (dir / "flag").string());
  ::unsetenv(kOutDirEnv);
}

TEST(Scenario, SeedOverrideChangesEstimateOutput) {
  const auto dir = scratch("seed");
  const auto cfg = write(dir, "a.toml", R"(name = "e"
kind = "estimate"
seed = 1
[model]
kind = "gaussian"
mu = [0.0]
sigma2 = [1.0]
[ensemble]
samples = 200
intervals = 4
)");
  RunOptions o;
  o.config_path = cfg.string();
  o.quiet = true;
  o.out_dir = (dir / "a").string();
  run(o);
  o.out_dir = (dir / "b").string();
  run(o);
  o.out_dir = (dir / "c").string();
  o.seed = 2;
  const auto r = run(o);
  EXPECT_EQ(r.seed, 2u);
  EXPECT_EQ(slurp(dir / "a" / "cumulants.csv"), slurp(dir / "b" / "cumulants.csv"));
  EXPECT_NE(slurp(dir / "a" / "cumulants.csv"), slurp(dir / "c" / "cumulants.csv"));
}

TEST(Scenario, ListingIsSortedAndDisambiguated) {
  const auto empty = scratch("list_empty");
  EXPECT_TRUE(list_scenarios(empty.string()).empty());
  const auto dir = scratch("list");
  write(dir, "b.toml", "name = \"same\"\nkind = \"flow\"\n");
  write(dir, "a.toml", "name = \"same\"\nkind = \"action\"\n");
  write(dir, "c.toml", "name = \"alpha\"\nkind = \"holonomy\"\n");
  write(dir, "broken.toml", "name = \n");
  write(dir, "notes.txt", "ignored");
  const auto s = list_scenarios(dir.string());
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s[0].name, "alpha");
  EXPECT_EQ(s[0].label, "alpha");
  EXPECT_EQ(s[1].name, "broken");
  EXPECT_EQ(s[1].kind, "invalid");
  EXPECT_EQ(s[2].name, "same");
  EXPECT_NE(s[2].label.find("a.toml"), std::string::npos);
  EXPECT_NE(s[3].label.find("b.toml"), std::string::npos);
  EXPECT_THROW(list_scenarios((dir / "nope").string()), std::runtime_error);
}

TEST(Scenario, BundledScenariosCoverEveryKind) {
  const auto s = list_scenarios(CONTACTDYN_SCENARIO_DIR);
  EXPECT_GE(s.size(), 7u);
  std::set<std::string> kinds;
  for (const auto& x : s) kinds.insert(x.kind);
  for (const auto& k : kind_names()) EXPECT_TRUE(kinds.count(k)) << k;
}
