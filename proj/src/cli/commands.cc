#include "cli/commands.h"

#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include "vhcplan/errors.h"
#include "vhcplan/feasibility.h"
#include "vhcplan/io.h"
#include "vhcplan/sim.h"
#include "vhcplan/singular_solver.h"
#include "vhcplan/transverse.h"
#include "vhcplan/vhc.h"

namespace vhcplan::cli {

namespace fs = std::filesystem;

namespace {

void write_json(const fs::path& path, const Json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

template <typename Writer>
void write_file(const fs::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  writer(out);
}

struct VhcSetup {
  MechanicalSystem sys = pvtol_model();
  ParametricVhc vhc;
  Vector q_s;
  std::optional<FamilyParameters> k;
  Interval interval;
  std::shared_ptr<ReducedModel> model;
  SingularityReport report;
  Json description;
};

VhcSetup setup_vhc(const RunConfig& config) {
  VhcSetup s;
  switch (config.vhc.kind) {
    case VhcKind::tic_toc:
      s.interval = {-2.0, 2.0};
      s.vhc = tic_toc_vhc(s.interval);
      s.q_s = s.vhc.phi(0.0);
      s.description = {{"kind", "tic_toc"}};
      break;
    case VhcKind::family:
    case VhcKind::auto_search: {
      const double psi = config.vhc.psi_s;
      if (!(psi > 0.0 && psi < 2.0 * std::numbers::pi && psi != std::numbers::pi)) {
        throw UsageError("vhc.psi_s: must lie in (0, pi) or (pi, 2 pi)");
      }
      s.q_s = Eigen::Vector3d(0.0, 0.0, psi);
      if (config.vhc.kind == VhcKind::family) {
        s.k = FamilyParameters{config.vhc.k1, config.vhc.k2, config.vhc.k3};
        s.interval = {-config.vhc.theta_max, config.vhc.theta_max};
      } else {
        const std::optional<FamilyFit> fit = find_family_parameters(psi);
        if (!fit) throw ConditionFailure("no family parameters in the search box pass the crossing check");
        s.k = fit->k;
        s.interval = fit->interval;
      }
      s.vhc = family_vhc(s.sys, s.q_s, *s.k, s.interval);
      s.description = {{"kind", to_string(config.vhc.kind)},
                       {"psi_s", psi},
                       {"parameters", io::to_json(*s.k)},
                       {"interval", {s.interval.lo, s.interval.hi}}};
      break;
    }
    case VhcKind::csv:
      throw UsageError("vhc.kind csv carries no constraint; use it with certify");
  }
  s.model = std::make_shared<ReducedModel>(ReducedModel::from_vhc(s.sys, s.vhc));
  CrossingCheckOptions opts;
  opts.grid_points = config.grid.crossing_check;
  s.report = check_singular_crossing(*s.model, opts);
  return s;
}

struct PlanResult {
  VhcSetup setup;
  std::optional<PeriodicTrajectory> traj;
  Json report;
};

// Runs the crossing check and, when it passes, the periodic solve and lift.
PlanResult plan(const RunConfig& config) {
  PlanResult out{setup_vhc(config), std::nullopt, Json()};
  const VhcSetup& s = out.setup;
  out.report["model"] = config.model;
  out.report["vhc"] = s.description;
  out.report["singularity"] = io::to_json(s.report);
  if (!s.report.overall) return out;

  BoundaryData b;
  const bool tic_toc = config.vhc.kind == VhcKind::tic_toc;
  b.theta1 = config.boundary.theta1.value_or(tic_toc ? -1.0 : -0.5 * s.interval.hi);
  b.theta2 = config.boundary.theta2.value_or(tic_toc ? 1.0 : 0.5 * s.interval.hi);
  b.theta1_dot = config.boundary.theta1_dot;
  b.theta2_dot = config.boundary.theta2_dot;
  const ScalarSolution solution = solve_boundary(*s.model, s.report, b);
  out.report["singular_acceleration"] = singular_acceleration(*s.model, s.report);
  out.report["boundary"] = {{"theta1", b.theta1},
                            {"theta1_dot", solution.front().theta_dot},
                            {"theta2", b.theta2},
                            {"theta2_dot", solution.back().theta_dot},
                            {"t1", solution.t_begin()},
                            {"t2", solution.t_end()}};
  if (b.theta1_dot != 0.0 || b.theta2_dot != 0.0) {
    out.report["periodic"] = false;
    return out;
  }
  const PeriodicScalarSolution periodic = make_periodic(solution);
  out.traj = lift(s.sys, s.vhc, periodic, config.grid.trajectory_samples);
  out.report["periodic"] = true;
  out.report["period"] = periodic.period();
  out.report["closure_error"] = replay_closure(s.sys, *out.traj);
  return out;
}

PeriodicTrajectory certify_trajectory(const RunConfig& config, Json* description) {
  switch (config.vhc.kind) {
    case VhcKind::tic_toc:
      *description = {{"kind", "tic_toc"}, {"source", "closed_form"}};
      return tic_toc_trajectory(config.grid.trajectory_samples);
    case VhcKind::csv: {
      std::ifstream in(config.vhc.path, std::ios::binary);
      if (!in) throw UsageError("cannot open trajectory file '" + config.vhc.path + "'");
      *description = {{"kind", "csv"}, {"path", config.vhc.path}};
      return io::read_trajectory_csv(in);
    }
    default: {
      PlanResult p = plan(config);
      if (!p.traj) throw ConditionFailure("the constraint admits no periodic orbit to certify");
      *description = p.report["vhc"];
      return *p.traj;
    }
  }
}

struct Stabilized {
  std::shared_ptr<TransverseChart> chart;
  std::optional<LtvModel> ltv;
  std::optional<GramianResult> gram;
  std::optional<GainSchedule> gains;
  Json report;
};

std::shared_ptr<TransverseChart> build_chart(const RunConfig& config, Json* description) {
  if (config.vhc.kind == VhcKind::tic_toc) {
    *description = {{"kind", "tic_toc"}};
    return std::make_shared<TransverseChart>(tic_toc_chart());
  }
  if (config.vhc.kind == VhcKind::csv) throw UsageError("stabilize and simulate need a constraint, not a CSV trajectory");
  PlanResult p = plan(config);
  if (!p.setup.report.overall) throw ConditionFailure("the constraint fails the singular crossing check");
  if (!p.traj) throw UsageError("stabilization needs rest-to-rest boundary data");
  *description = p.report["vhc"];
  auto geometry = std::make_shared<VhcGeometry>(p.setup.vhc, p.setup.q_s, p.setup.vhc.dphi(0.0));
  auto orbit = std::make_shared<SampledOrbit>(*p.traj, geometry);
  return std::make_shared<TransverseChart>(p.setup.sys, geometry, orbit);
}

Stabilized stabilize(const RunConfig& config, bool need_gains) {
  Stabilized s;
  Json description;
  s.chart = build_chart(config, &description);
  s.report["vhc"] = description;
  if (!need_gains) return s;
  s.ltv = linearize(*s.chart, config.grid.transverse);
  s.gram = gramian(*s.ltv);
  s.report["grid"] = config.grid.transverse;
  s.report["gramian"] = io::to_json(*s.gram);
  const Eigen::VectorXd qd = Eigen::Map<const Eigen::VectorXd>(config.lqr.q_diag.data(), 5);
  const Eigen::VectorXd rd = Eigen::Map<const Eigen::VectorXd>(config.lqr.r_diag.data(), 2);
  s.gains = periodic_lqr(*s.ltv, Matrix(qd.asDiagonal()), Matrix(rd.asDiagonal()));
  s.report["riccati_sweeps"] = s.gains->sweeps;
  return s;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const PreconditionError*>(&e)) return kExitUsage;
  if (dynamic_cast<const ConditionFailure*>(&e)) return kExitCondition;
  return kExitNumerical;
}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e)) return "usage";
  if (dynamic_cast<const PreconditionError*>(&e)) return "precondition";
  if (dynamic_cast<const ConditionFailure*>(&e)) return "condition";
  if (dynamic_cast<const UncontrollableError*>(&e)) return "uncontrollable";
  if (dynamic_cast<const NumericalError*>(&e)) return "numerical";
  if (dynamic_cast<const ModelInvariantError*>(&e)) return "model_invariant";
  return "internal";
}

int cmd_plan(const RunConfig& config, std::ostream& log) {
  const fs::path dir(config.output_dir);
  PlanResult p = plan(config);
  if (p.traj) write_file(dir / "trajectory.csv", [&](std::ostream& os) { io::write_trajectory_csv(os, *p.traj); });
  write_json(dir / "report.json", p.report);
  const SingularityReport& r = p.setup.report;
  log << "crossing check: " << (r.overall ? "pass" : "FAIL") << "  theta_s=" << r.theta_s
      << "  v_s=" << (r.v_s ? io::format_double(*r.v_s) : "n/a") << '\n';
  if (!r.overall) return kExitCondition;
  if (p.traj) log << "period " << p.report["period"].get<double>() << ", " << p.traj->samples().size() << " samples\n";
  return kExitOk;
}

int cmd_certify(const RunConfig& config, std::ostream& log) {
  const fs::path dir(config.output_dir);
  Json description;
  const PeriodicTrajectory traj = certify_trajectory(config, &description);
  const MechanicalSystem sys = pvtol_model();
  const NoVhcCertificate cert = certify_no_regular_vhc(sys, traj);

  const std::vector<double> zeros = accessibility_zeros(sys, traj);
  write_file(dir / "accessibility.csv", [&](std::ostream& os) {
    os << "t,det_closed_form,det_numeric\r\n";
    for (const TrajectorySample& s : traj.samples()) {
      const PhaseState ps{s.q, s.qdot};
      os << io::format_double(s.t) << ','
         << io::format_double(accessibility_det(sys, ps, AccessibilityMethod::closed_form).determinant) << ','
         << io::format_double(accessibility_det(sys, ps, AccessibilityMethod::numeric_bracket).determinant)
         << "\r\n";
    }
  });
  Json report;
  report["trajectory"] = description;
  report["certificate"] = io::to_json(cert);
  report["accessibility_zeros"] = zeros;
  write_json(dir / "certificate.json", report["certificate"]);
  write_json(dir / "report.json", report);

  log << "verdict: " << to_string(cert.verdict) << " (" << cert.explanation << ")\n";
  log << std::setw(14) << "t_s" << std::setw(14) << "|B_perp M q'|" << std::setw(14) << "|q'|" << std::setw(14)
      << "dist(G,Im B)" << "  holds\n";
  for (const CertificateRecord& r : cert.records) {
    log << std::setw(14) << r.time.t << std::setw(14) << r.time.annihilator_residual << std::setw(14)
        << r.time.velocity_norm << std::setw(14) << r.time.gravity_distance << "  "
        << (r.hypotheses_hold ? "yes" : "no") << '\n';
  }
  log << "accessibility determinant vanishes at t =";
  for (double z : zeros) log << ' ' << z;
  log << '\n';
  return cert.verdict == CertificateVerdict::no_regular_vhc ? kExitOk : kExitCondition;
}

int cmd_stabilize(const RunConfig& config, std::ostream& log) {
  const fs::path dir(config.output_dir);
  Stabilized s = stabilize(config, true);
  const MonodromyResult open = monodromy(*s.ltv, nullptr);
  const MonodromyResult closed = monodromy(*s.ltv, &*s.gains);
  write_file(dir / "ltv.csv", [&](std::ostream& os) { io::write_ltv_csv(os, *s.ltv); });
  write_file(dir / "gains.csv", [&](std::ostream& os) { io::write_gains_csv(os, *s.gains); });
  const Json spectra = {{"gramian_eigenvalues", io::to_json(Vector(s.gram->eigenvalues))},
                        {"open_loop", io::to_json(open)},
                        {"closed_loop", io::to_json(closed)}};
  write_json(dir / "spectra.json", spectra);
  s.report["open_loop_spectral_radius"] = open.spectral_radius;
  s.report["closed_loop_spectral_radius"] = closed.spectral_radius;
  write_json(dir / "report.json", s.report);
  log << "Gramian eigenvalues:";
  for (Eigen::Index i = 0; i < s.gram->eigenvalues.size(); ++i) log << ' ' << s.gram->eigenvalues(i);
  log << "\nclosed-loop multipliers |lambda|:";
  for (const auto& z : closed.eigenvalues) log << ' ' << std::abs(z);
  log << "\nopen-loop spectral radius " << open.spectral_radius << '\n';
  return closed.spectral_radius < 1.0 ? kExitOk : kExitNumerical;
}

int cmd_simulate(const RunConfig& config, std::ostream& log) {
  const fs::path dir(config.output_dir);
  Stabilized s = stabilize(config, !config.sim.open_loop);
  PhaseState x0{Eigen::Map<const Vector>(config.sim.q0.data(), 3), Eigen::Map<const Vector>(config.sim.qdot0.data(), 3)};
  SimulationOptions opts;
  opts.dt = config.sim.dt;
  opts.horizon = config.sim.horizon;
  opts.zero_order_hold = config.sim.zero_order_hold;
  const SimulationResult result = run_closed_loop(*s.chart, s.gains ? &*s.gains : nullptr, x0, opts);
  write_file(dir / "simulation.csv", [&](std::ostream& os) { io::write_simulation_csv(os, *s.chart, result); });
  const SimSample& last = result.samples.back();
  s.report["closed_loop"] = result.closed_loop;
  s.report["steps"] = result.samples.size() - 1;
  s.report["final_time"] = last.t;
  s.report["final_orbit_error"] = last.rho ? Json(last.rho->norm()) : Json(nullptr);
  s.report["initial_orbit_error"] = result.samples.front().rho ? Json(result.samples.front().rho->norm()) : Json(nullptr);
  s.report["diverged"] = result.diverged;
  s.report["diagnostic"] = result.diagnostic;
  write_json(dir / "report.json", s.report);
  log << (result.closed_loop ? "closed loop" : "open loop") << ", " << result.samples.size() - 1 << " steps, final |rho| "
      << (last.rho ? io::format_double(last.rho->norm()) : "outside tube") << '\n';
  if (result.diverged) throw NumericalError("simulation diverged: " + result.diagnostic);
  return kExitOk;
}

int cmd_sweep(const RunConfig& config, std::ostream& log) {
  const fs::path dir = fs::path(config.output_dir) / "sweep";
  fs::create_directories(dir);
  const std::size_t count = config.sweep.psi_s.size();
  std::vector<Json> entries(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      RunConfig job = config;
      job.vhc.kind = VhcKind::auto_search;
      job.vhc.psi_s = config.sweep.psi_s[i];
      std::ostringstream name;
      name << "psi_" << std::setw(2) << std::setfill('0') << i;
      job.output_dir = (dir / name.str()).string();
      Json entry = {{"index", i}, {"psi_s", job.vhc.psi_s}, {"directory", name.str()}};
      try {
        fs::create_directories(job.output_dir);
        std::ostringstream sink;
        const int code = cmd_plan(job, sink);
        entry["exit_code"] = code;
        entry["report"] = load_json_file((fs::path(job.output_dir) / "report.json").string());
      } catch (const std::exception& e) {
        entry["exit_code"] = exit_code_for(e);
        entry["error"] = {{"kind", error_kind(e)}, {"message", e.what()}};
      }
      entries[i] = std::move(entry);
    }
  };
  unsigned threads = config.sweep.threads > 0 ? static_cast<unsigned>(config.sweep.threads)
                                              : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  Json summary = Json::array();
  int worst = kExitOk;
  for (std::size_t i = 0; i < count; ++i) {
    const int code = entries[i]["exit_code"].get<int>();
    worst = std::max(worst, code);
    log << "psi_s=" << config.sweep.psi_s[i] << "  exit " << code << '\n';
    summary.push_back(entries[i]);
  }
  write_json(fs::path(config.output_dir) / "report.json", {{"sweep", summary}});
  return worst;
}

int run_command(const std::string& name, const RunConfig& config, std::ostream& log) {
  const fs::path dir(config.output_dir);
  try {
    fs::create_directories(dir);
    fs::remove(dir / "error.json");
    write_json(dir / "config.resolved.json", to_json(config));
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::ostringstream stamp;
    stamp << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
    write_json(dir / "metadata.json", {{"command", name}, {"timestamp", stamp.str()}, {"version", "1.0.0"}});
    if (name == "plan") return cmd_plan(config, log);
    if (name == "certify") return cmd_certify(config, log);
    if (name == "stabilize") return cmd_stabilize(config, log);
    if (name == "simulate") return cmd_simulate(config, log);
    if (name == "sweep") return cmd_sweep(config, log);
    throw UsageError("unknown command '" + name + "'");
  } catch (const std::exception& e) {
    const int code = exit_code_for(e);
    try {
      write_json(dir / "error.json", {{"command", name}, {"kind", error_kind(e)}, {"message", e.what()}, {"exit_code", code}});
    } catch (const std::exception&) {
    }
    log << "error (" << error_kind(e) << "): " << e.what() << '\n';
    return code;
  }
}

}  // namespace vhcplan::cli
