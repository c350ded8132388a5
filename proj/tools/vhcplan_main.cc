#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli/commands.h"
#include "cli/config.h"

namespace {

using vhcplan::cli::Json;

struct Overrides {
  std::string config_path;
  std::optional<std::string> output_dir;
  std::optional<std::string> vhc_kind;
  std::optional<double> psi_s, k1, k2, k3, theta_max;
  std::optional<std::string> trajectory_csv;
  std::optional<double> theta1, theta2, theta1_dot, theta2_dot;
  std::optional<int> samples, grid, crossing_grid;
  std::optional<std::vector<double>> q_diag, r_diag, q0, qdot0, psi_list;
  std::optional<double> dt, horizon;
  bool open_loop{false};
  bool zero_order_hold{false};
  std::optional<int> threads;
  bool sweep{false};
};

void add_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config_path, "JSON run configuration (defaults apply to absent keys)");
  cmd->add_option("-o,--output-dir", o.output_dir, "Directory for all outputs [vhcplan_out]");
  cmd->add_option("--vhc", o.vhc_kind, "Constraint: tic_toc, family, auto or csv [tic_toc]")
      ->check(CLI::IsMember({"tic_toc", "family", "auto", "csv"}));
  cmd->add_option("--psi-s", o.psi_s, "Attitude at the singular configuration, family/auto [pi/2]");
  cmd->add_option("--k1", o.k1, "Family parameter k1 [1]");
  cmd->add_option("--k2", o.k2, "Family parameter k2 [2]");
  cmd->add_option("--k3", o.k3, "Family parameter k3 [-1]");
  cmd->add_option("--theta-max", o.theta_max, "Family half-interval [0.5]");
  cmd->add_option("--trajectory-csv", o.trajectory_csv, "Trajectory file for --vhc csv");
  cmd->add_option("--theta1", o.theta1, "Left boundary value [-1 tic_toc, -theta_max/2 family]");
  cmd->add_option("--theta2", o.theta2, "Right boundary value [1 tic_toc, theta_max/2 family]");
  cmd->add_option("--theta1-dot", o.theta1_dot, "Left boundary velocity [0]");
  cmd->add_option("--theta2-dot", o.theta2_dot, "Right boundary velocity [0]");
  cmd->add_option("--samples", o.samples, "Trajectory samples per period [2048]");
  cmd->add_option("--grid", o.grid, "Transverse linearization grid size, even [512]");
  cmd->add_option("--crossing-grid", o.crossing_grid, "Grid for locating zeros of alpha [2048]");
  cmd->add_option("--q-diag", o.q_diag, "LQR state weight diagonal, 5 values [1 1 1 1 1]")->expected(5);
  cmd->add_option("--r-diag", o.r_diag, "LQR input weight diagonal, 2 values [1 1]")->expected(2);
  cmd->add_option("--dt", o.dt, "Simulation step in seconds [0.01]");
  cmd->add_option("--horizon", o.horizon, "Simulation horizon in seconds [6 pi]");
  cmd->add_option("--q0", o.q0, "Initial configuration x z psi [0.1 -0.5 0]")->expected(3);
  cmd->add_option("--qdot0", o.qdot0, "Initial velocity [0 0 0]")->expected(3);
  cmd->add_flag("--open-loop", o.open_loop, "Simulate with feedforward only (K = 0)");
  cmd->add_flag("--zoh", o.zero_order_hold, "Hold the control over each integration step");
  cmd->add_option("--psi-list", o.psi_list, "Sweep attitudes [pi/4 .. 7pi/4 without pi]");
  cmd->add_option("--threads", o.threads, "Sweep worker threads, 0 for all cores [0]");
}

Json merged_config(const Overrides& o) {
  Json doc = o.config_path.empty() ? Json::object() : vhcplan::cli::load_json_file(o.config_path);
  if (!doc.is_object()) throw vhcplan::cli::UsageError("config: top level must be an object");
  auto section = [&doc](const char* name) -> Json& {
    if (!doc.contains(name)) doc[name] = Json::object();
    return doc[name];
  };
  auto set = [](Json& obj, const char* key, const auto& value) {
    if (value) obj[key] = *value;
  };
  set(doc, "output_dir", o.output_dir);
  set(section("vhc"), "kind", o.vhc_kind);
  set(section("vhc"), "psi_s", o.psi_s);
  set(section("vhc"), "k1", o.k1);
  set(section("vhc"), "k2", o.k2);
  set(section("vhc"), "k3", o.k3);
  set(section("vhc"), "theta_max", o.theta_max);
  set(section("vhc"), "path", o.trajectory_csv);
  set(section("boundary"), "theta1", o.theta1);
  set(section("boundary"), "theta2", o.theta2);
  set(section("boundary"), "theta1_dot", o.theta1_dot);
  set(section("boundary"), "theta2_dot", o.theta2_dot);
  set(section("grid"), "trajectory_samples", o.samples);
  set(section("grid"), "transverse", o.grid);
  set(section("grid"), "crossing_check", o.crossing_grid);
  set(section("lqr"), "q_diag", o.q_diag);
  set(section("lqr"), "r_diag", o.r_diag);
  set(section("sim"), "dt", o.dt);
  set(section("sim"), "horizon", o.horizon);
  set(section("sim"), "q0", o.q0);
  set(section("sim"), "qdot0", o.qdot0);
  if (o.open_loop) section("sim")["open_loop"] = true;
  if (o.zero_order_hold) section("sim")["zero_order_hold"] = true;
  set(section("sweep"), "psi_s", o.psi_list);
  set(section("sweep"), "threads", o.threads);
  for (const char* name : {"vhc", "boundary", "grid", "lqr", "sim", "sweep"}) {
    if (doc[name].is_object() && doc[name].empty()) doc.erase(name);
  }
  return doc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Singular-VHC trajectory planning, certification and orbital stabilization"};
  app.require_subcommand(1);
  std::map<std::string, Overrides> overrides;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"plan", "Check the crossing conditions, solve the reduced dynamics and lift the orbit"},
      {"certify", "Certify that no regular VHC holds the orbit; accessibility determinant table"},
      {"stabilize", "Transverse linearization, Gramian, periodic LQR gains and monodromy"},
      {"simulate", "Closed-loop simulation of the stabilized orbit"},
      {"sweep", "Auto-search and plan the family over a list of attitudes, in parallel"}};
  for (const auto& [name, help] : commands) {
    CLI::App* cmd = app.add_subcommand(name, help);
    add_options(cmd, overrides[name]);
    if (name == "plan") cmd->add_flag("--sweep", overrides[name].sweep, "Run the sweep instead of a single plan");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : vhcplan::cli::kExitUsage;
  }
  for (const auto& [name, help] : commands) {
    if (!app.got_subcommand(name)) continue;
    const Overrides& o = overrides[name];
    vhcplan::cli::RunConfig config;
    try {
      config = vhcplan::cli::parse_config(merged_config(o));
    } catch (const std::exception& e) {
      std::cerr << "error (usage): " << e.what() << '\n';
      return vhcplan::cli::kExitUsage;
    }
    const std::string command = (name == "plan" && o.sweep) ? "sweep" : name;
    return vhcplan::cli::run_command(command, config, std::cout);
  }
  return vhcplan::cli::kExitUsage;
}
