#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "cli/commands.h"
#include "cli/config.h"
#include "vhcplan/errors.h"

namespace vhcplan::cli {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path(::testing::TempDir()) / ("vhcplan_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

TEST(Config, DefaultsAreDocumentedAndRoundTrip) {
  const RunConfig c = parse_config(Json::object());
  EXPECT_EQ(c.model, "pvtol");
  EXPECT_EQ(c.vhc.kind, VhcKind::tic_toc);
  EXPECT_EQ(c.grid.transverse, 512);
  EXPECT_DOUBLE_EQ(c.sim.dt, 0.01);
  const Json resolved = to_json(c);
  for (const char* key : {"model", "vhc", "boundary", "grid", "lqr", "sim", "sweep", "output_dir"}) {
    EXPECT_TRUE(resolved.contains(key)) << key;
  }
  EXPECT_EQ(to_json(parse_config(resolved)).dump(), resolved.dump());
}

TEST(Config, OverridesApply) {
  const Json doc = Json::parse(R"({"vhc": {"kind": "family", "psi_s": 0.7, "k3": -0.5},
                                   "boundary": {"theta1": -0.2, "theta2": 0.3},
                                   "sim": {"open_loop": true, "q0": [0, 0, 1.5]}})");
  const RunConfig c = parse_config(doc);
  EXPECT_EQ(c.vhc.kind, VhcKind::family);
  EXPECT_DOUBLE_EQ(c.vhc.psi_s, 0.7);
  EXPECT_DOUBLE_EQ(c.vhc.k3, -0.5);
  EXPECT_DOUBLE_EQ(c.vhc.k1, 1.0);
  EXPECT_DOUBLE_EQ(*c.boundary.theta1, -0.2);
  EXPECT_TRUE(c.sim.open_loop);
  EXPECT_DOUBLE_EQ(c.sim.q0[2], 1.5);
}

TEST(Config, RejectsMalformedDocuments) {
  for (const char* text : {R"({"bogus": 1})", R"({"vhc": {"kind": "tic_toc", "extra": 0}})",
                           R"({"vhc": {"kind": "spline"}})", R"({"sim": {"dt": -1}})", R"({"sim": {"dt": "fast"}})",
                           R"({"grid": {"transverse": 513}})", R"({"lqr": {"r_diag": [1, 0]}})",
                           R"({"lqr": {"q_diag": [1, 1]}})", R"({"model": "acrobot"})", R"([1, 2])",
                           R"({"vhc": {"kind": "csv"}})"}) {
    EXPECT_THROW(parse_config(Json::parse(text)), UsageError) << text;
  }
  EXPECT_THROW(load_json_file("/nonexistent/config.json"), UsageError);
}

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(exit_code_for(UsageError("x")), 64);
  EXPECT_EQ(exit_code_for(PreconditionError("x")), 64);
  EXPECT_EQ(exit_code_for(ConditionFailure("x")), 2);
  EXPECT_EQ(exit_code_for(NumericalError("x")), 3);
  EXPECT_EQ(exit_code_for(UncontrollableError("x")), 3);
  EXPECT_EQ(exit_code_for(ModelInvariantError("x")), 3);
}

TEST(Commands, PlanTicTocIsReproducible) {
  RunConfig c = parse_config(Json::object());
  std::ostringstream log;
  c.output_dir = scratch("plan_a").string();
  ASSERT_EQ(run_command("plan", c, log), 0) << log.str();
  const fs::path a(c.output_dir);
  for (const char* f : {"trajectory.csv", "report.json", "config.resolved.json", "metadata.json"}) {
    EXPECT_TRUE(fs::exists(a / f)) << f;
  }
  EXPECT_FALSE(fs::exists(a / "error.json"));
  c.output_dir = scratch("plan_b").string();
  ASSERT_EQ(run_command("plan", c, log), 0);
  const fs::path b(c.output_dir);
  EXPECT_EQ(slurp(a / "trajectory.csv"), slurp(b / "trajectory.csv"));
  EXPECT_EQ(slurp(a / "report.json"), slurp(b / "report.json"));
}

TEST(Commands, PlanFamilyFailingRatioExitsTwo) {
  RunConfig c = parse_config(Json::parse(R"({"vhc": {"kind": "family", "psi_s": 1.5707963267948966, "k3": 1}})"));
  c.output_dir = scratch("plan_fail").string();
  std::ostringstream log;
  EXPECT_EQ(run_command("plan", c, log), 2);
  const Json report = Json::parse(slurp(fs::path(c.output_dir) / "report.json"));
  EXPECT_FALSE(report.at("singularity").at("flags").at("ratio_below_minus_half").get<bool>());
  EXPECT_FALSE(report.at("singularity").at("overall").get<bool>());
}

TEST(Commands, CertifyTicToc) {
  RunConfig c = parse_config(Json::object());
  c.output_dir = scratch("certify").string();
  std::ostringstream log;
  ASSERT_EQ(run_command("certify", c, log), 0) << log.str();
  const Json cert = Json::parse(slurp(fs::path(c.output_dir) / "certificate.json"));
  EXPECT_EQ(cert.at("verdict").get<std::string>(), "no_regular_vhc");
  EXPECT_TRUE(fs::exists(fs::path(c.output_dir) / "accessibility.csv"));
}

TEST(Commands, UsageErrorWritesErrorJson) {
  RunConfig c = parse_config(Json::parse(R"({"vhc": {"kind": "family", "psi_s": 3.141592653589793}})"));
  c.output_dir = scratch("usage").string();
  std::ostringstream log;
  EXPECT_EQ(run_command("plan", c, log), 64);
  const Json err = Json::parse(slurp(fs::path(c.output_dir) / "error.json"));
  EXPECT_EQ(err.at("exit_code").get<int>(), 64);
  EXPECT_EQ(run_command("launch", c, log), 64);
}

}  // namespace
}  // namespace vhcplan::cli
