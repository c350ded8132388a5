#include "cli/config.h"

#include <cmath>
#include <fstream>
#include <set>

namespace vhcplan::cli {

namespace {

void reject_unknown(const Json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw UsageError(where + ": expected an object");
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) throw UsageError(where + ": unknown key '" + item.key() + "'");
  }
}

double get_number(const Json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_number()) throw UsageError(where + "." + key + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw UsageError(where + "." + key + ": must be finite");
  return d;
}

std::optional<double> get_optional_number(const Json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  return get_number(obj, key, 0.0, where);
}

int get_int(const Json& obj, const char* key, int fallback, int min_value, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_number_integer()) throw UsageError(where + "." + key + ": expected an integer");
  const auto i = v.get<long long>();
  if (i < min_value || i > 1'000'000'000) {
    throw UsageError(where + "." + key + ": must be at least " + std::to_string(min_value));
  }
  return static_cast<int>(i);
}

bool get_bool(const Json& obj, const char* key, bool fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_boolean()) throw UsageError(where + "." + key + ": expected true or false");
  return obj.at(key).get<bool>();
}

std::string get_string(const Json& obj, const char* key, const std::string& fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_string()) throw UsageError(where + "." + key + ": expected a string");
  return obj.at(key).get<std::string>();
}

std::vector<double> get_numbers(const Json& obj, const char* key, const std::vector<double>& fallback,
                                std::size_t size, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_array()) throw UsageError(where + "." + key + ": expected an array of numbers");
  std::vector<double> out;
  for (const Json& e : v) {
    if (!e.is_number() || !std::isfinite(e.get<double>())) {
      throw UsageError(where + "." + key + ": expected finite numbers");
    }
    out.push_back(e.get<double>());
  }
  if (size != 0 && out.size() != size) {
    throw UsageError(where + "." + key + ": expected " + std::to_string(size) + " entries");
  }
  return out;
}

VhcKind parse_kind(const std::string& s) {
  if (s == "tic_toc") return VhcKind::tic_toc;
  if (s == "family") return VhcKind::family;
  if (s == "auto") return VhcKind::auto_search;
  if (s == "csv") return VhcKind::csv;
  throw UsageError("vhc.kind: expected tic_toc, family, auto or csv, got '" + s + "'");
}

}  // namespace

const char* to_string(VhcKind kind) {
  switch (kind) {
    case VhcKind::tic_toc:
      return "tic_toc";
    case VhcKind::family:
      return "family";
    case VhcKind::auto_search:
      return "auto";
    case VhcKind::csv:
      return "csv";
  }
  return "unknown";
}

RunConfig parse_config(const Json& doc) {
  RunConfig c;
  reject_unknown(doc, "config", {"model", "vhc", "boundary", "grid", "lqr", "sim", "sweep", "output_dir"});
  c.model = get_string(doc, "model", c.model, "config");
  if (c.model != "pvtol") throw UsageError("config.model: only 'pvtol' is available");
  c.output_dir = get_string(doc, "output_dir", c.output_dir, "config");
  if (c.output_dir.empty()) throw UsageError("config.output_dir: must not be empty");

  if (doc.contains("vhc")) {
    const Json& v = doc.at("vhc");
    reject_unknown(v, "vhc", {"kind", "psi_s", "k1", "k2", "k3", "theta_max", "path"});
    c.vhc.kind = parse_kind(get_string(v, "kind", "tic_toc", "vhc"));
    c.vhc.psi_s = get_number(v, "psi_s", c.vhc.psi_s, "vhc");
    c.vhc.k1 = get_number(v, "k1", c.vhc.k1, "vhc");
    c.vhc.k2 = get_number(v, "k2", c.vhc.k2, "vhc");
    c.vhc.k3 = get_number(v, "k3", c.vhc.k3, "vhc");
    c.vhc.theta_max = get_number(v, "theta_max", c.vhc.theta_max, "vhc");
    c.vhc.path = get_string(v, "path", c.vhc.path, "vhc");
  }
  if (!(c.vhc.theta_max > 0.0)) throw UsageError("vhc.theta_max: must be positive");
  if (c.vhc.kind == VhcKind::csv && c.vhc.path.empty()) throw UsageError("vhc.path: required for kind csv");

  if (doc.contains("boundary")) {
    const Json& b = doc.at("boundary");
    reject_unknown(b, "boundary", {"theta1", "theta1_dot", "theta2", "theta2_dot"});
    c.boundary.theta1 = get_optional_number(b, "theta1", "boundary");
    c.boundary.theta2 = get_optional_number(b, "theta2", "boundary");
    c.boundary.theta1_dot = get_number(b, "theta1_dot", 0.0, "boundary");
    c.boundary.theta2_dot = get_number(b, "theta2_dot", 0.0, "boundary");
  }
  if (doc.contains("grid")) {
    const Json& g = doc.at("grid");
    reject_unknown(g, "grid", {"trajectory_samples", "transverse", "crossing_check"});
    c.grid.trajectory_samples = get_int(g, "trajectory_samples", c.grid.trajectory_samples, 500, "grid");
    c.grid.transverse = get_int(g, "transverse", c.grid.transverse, 4, "grid");
    c.grid.crossing_check = get_int(g, "crossing_check", c.grid.crossing_check, 3, "grid");
    if (c.grid.transverse % 2 != 0) throw UsageError("grid.transverse: must be even");
  }
  if (doc.contains("lqr")) {
    const Json& l = doc.at("lqr");
    reject_unknown(l, "lqr", {"q_diag", "r_diag"});
    c.lqr.q_diag = get_numbers(l, "q_diag", c.lqr.q_diag, 5, "lqr");
    c.lqr.r_diag = get_numbers(l, "r_diag", c.lqr.r_diag, 2, "lqr");
  }
  for (double q : c.lqr.q_diag) {
    if (q < 0.0) throw UsageError("lqr.q_diag: entries must be non-negative");
  }
  for (double r : c.lqr.r_diag) {
    if (!(r > 0.0)) throw UsageError("lqr.r_diag: entries must be positive");
  }
  if (doc.contains("sim")) {
    const Json& s = doc.at("sim");
    reject_unknown(s, "sim", {"dt", "horizon", "q0", "qdot0", "open_loop", "zero_order_hold"});
    c.sim.dt = get_number(s, "dt", c.sim.dt, "sim");
    c.sim.horizon = get_number(s, "horizon", c.sim.horizon, "sim");
    c.sim.q0 = get_numbers(s, "q0", c.sim.q0, 3, "sim");
    c.sim.qdot0 = get_numbers(s, "qdot0", c.sim.qdot0, 3, "sim");
    c.sim.open_loop = get_bool(s, "open_loop", c.sim.open_loop, "sim");
    c.sim.zero_order_hold = get_bool(s, "zero_order_hold", c.sim.zero_order_hold, "sim");
  }
  if (!(c.sim.dt > 0.0)) throw UsageError("sim.dt: must be positive");
  if (!(c.sim.horizon >= 0.0)) throw UsageError("sim.horizon: must be non-negative");
  if (doc.contains("sweep")) {
    const Json& s = doc.at("sweep");
    reject_unknown(s, "sweep", {"psi_s", "threads"});
    c.sweep.psi_s = get_numbers(s, "psi_s", c.sweep.psi_s, 0, "sweep");
    c.sweep.threads = get_int(s, "threads", c.sweep.threads, 0, "sweep");
  }
  return c;
}

Json to_json(const RunConfig& c) {
  Json out;
  out["model"] = c.model;
  out["vhc"] = {{"kind", to_string(c.vhc.kind)}, {"psi_s", c.vhc.psi_s}, {"k1", c.vhc.k1},
                {"k2", c.vhc.k2},                {"k3", c.vhc.k3},       {"theta_max", c.vhc.theta_max},
                {"path", c.vhc.path}};
  out["boundary"] = {{"theta1", c.boundary.theta1 ? Json(*c.boundary.theta1) : Json(nullptr)},
                     {"theta1_dot", c.boundary.theta1_dot},
                     {"theta2", c.boundary.theta2 ? Json(*c.boundary.theta2) : Json(nullptr)},
                     {"theta2_dot", c.boundary.theta2_dot}};
  out["grid"] = {{"trajectory_samples", c.grid.trajectory_samples},
                 {"transverse", c.grid.transverse},
                 {"crossing_check", c.grid.crossing_check}};
  out["lqr"] = {{"q_diag", c.lqr.q_diag}, {"r_diag", c.lqr.r_diag}};
  out["sim"] = {{"dt", c.sim.dt},
                {"horizon", c.sim.horizon},
                {"q0", c.sim.q0},
                {"qdot0", c.sim.qdot0},
                {"open_loop", c.sim.open_loop},
                {"zero_order_hold", c.sim.zero_order_hold}};
  out["sweep"] = {{"psi_s", c.sweep.psi_s}, {"threads", c.sweep.threads}};
  out["output_dir"] = c.output_dir;
  return out;
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace vhcplan::cli
