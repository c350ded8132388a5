#include "vhcplan/io.h"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "vhcplan/errors.h"

namespace vhcplan::io {

namespace {

constexpr const char* kEol = "\r\n";

std::vector<std::string> coordinate_names(int n) {
  if (n == 3) return {"x", "z", "psi"};
  std::vector<std::string> names;
  for (int i = 1; i <= n; ++i) names.push_back("q" + std::to_string(i));
  return names;
}

void write_header(std::ostream& os, int n, int m) {
  os << "t,theta,thetadot";
  const auto names = coordinate_names(n);
  for (const auto& c : names) os << ',' << c;
  for (const auto& c : names) os << ',' << c << "dot";
  for (int i = 1; i <= m; ++i) os << ",u" << i;
}

void write_row(std::ostream& os, double t, double theta, double theta_dot, const Vector& q, const Vector& qdot,
               const Vector& u) {
  os << format_double(t) << ',' << format_double(theta) << ',' << format_double(theta_dot);
  for (Eigen::Index i = 0; i < q.size(); ++i) os << ',' << format_double(q(i));
  for (Eigen::Index i = 0; i < qdot.size(); ++i) os << ',' << format_double(qdot(i));
  for (Eigen::Index i = 0; i < u.size(); ++i) os << ',' << format_double(u(i));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw PreconditionError("trajectory CSV: bad number '" + s + "'");
  }
  if (pos != s.size()) throw PreconditionError("trajectory CSV: bad number '" + s + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trajectory_csv(std::ostream& os, const PeriodicTrajectory& traj) {
  const auto& s = traj.samples();
  write_header(os, static_cast<int>(s.front().q.size()), static_cast<int>(s.front().u.size()));
  os << kEol;
  for (const TrajectorySample& r : s) {
    write_row(os, r.t, r.theta, r.theta_dot, r.q, r.qdot, r.u);
    os << kEol;
  }
}

PeriodicTrajectory read_trajectory_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw PreconditionError("trajectory CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_fields(line);
  if (header.size() < 6 || header[0] != "t" || header[1] != "theta" || header[2] != "thetadot") {
    throw PreconditionError("trajectory CSV: unexpected header");
  }
  int m = 0;
  while (m < static_cast<int>(header.size()) && header[header.size() - 1 - m].rfind('u', 0) == 0) ++m;
  const int n = (static_cast<int>(header.size()) - 3 - m) / 2;
  if (n < 2 || m != n - 1 || 3 + 2 * n + m != static_cast<int>(header.size())) {
    throw PreconditionError("trajectory CSV: header does not describe n coordinates and n - 1 inputs");
  }
  std::vector<TrajectorySample> samples;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != header.size()) throw PreconditionError("trajectory CSV: row has the wrong number of fields");
    TrajectorySample s;
    s.t = parse_double(f[0]);
    s.theta = parse_double(f[1]);
    s.theta_dot = parse_double(f[2]);
    s.q = Vector(n);
    s.qdot = Vector(n);
    s.qddot = Vector::Zero(n);
    s.u = Vector(m);
    for (int i = 0; i < n; ++i) {
      s.q(i) = parse_double(f[3 + i]);
      s.qdot(i) = parse_double(f[3 + n + i]);
    }
    for (int i = 0; i < m; ++i) s.u(i) = parse_double(f[3 + 2 * n + i]);
    samples.push_back(std::move(s));
  }
  if (samples.size() < 4) throw PreconditionError("trajectory CSV: need at least 4 rows");
  const double step = samples[1].t - samples[0].t;
  for (std::size_t k = 1; k < samples.size(); ++k) {
    if (!(step > 0.0) || std::abs(samples[k].t - samples[k - 1].t - step) > 1e-9 * (1.0 + std::abs(samples[k].t))) {
      throw PreconditionError("trajectory CSV: rows must be uniformly spaced in t");
    }
  }
  // Accelerations by periodic central differences of the velocities.
  const std::size_t count = samples.size();
  for (std::size_t k = 0; k < count; ++k) {
    const auto& next = samples[(k + 1) % count];
    const auto& prev = samples[(k + count - 1) % count];
    samples[k].qddot = (next.qdot - prev.qdot) / (2.0 * step);
  }
  return PeriodicTrajectory::from_samples(step * static_cast<double>(count), std::move(samples));
}

void write_simulation_csv(std::ostream& os, const TransverseChart& chart, const SimulationResult& result) {
  const int n = chart.system().dof();
  write_header(os, n, chart.num_inputs());
  os << ",tau";
  for (int i = 1; i <= chart.dim(); ++i) os << ",rho" << i;
  os << kEol;
  const ChartGeometry& g = chart.geometry();
  for (const SimSample& s : result.samples) {
    write_row(os, s.t, g.phase(s.q), g.phase_gradient(s.q).dot(s.qdot), s.q, s.qdot, s.u);
    os << ',' << format_double(s.tau);
    for (int i = 0; i < chart.dim(); ++i) {
      os << ',';
      if (s.rho) os << format_double((*s.rho)(i));
    }
    os << kEol;
  }
}

namespace {

void write_matrix_header(std::ostream& os, char name, Eigen::Index rows, Eigen::Index cols) {
  for (Eigen::Index i = 1; i <= rows; ++i) {
    for (Eigen::Index j = 1; j <= cols; ++j) os << ',' << name << i << j;
  }
}

void write_matrix_fields(std::ostream& os, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << ',' << format_double(m(i, j));
  }
}

}  // namespace

void write_ltv_csv(std::ostream& os, const LtvModel& model) {
  os << "tau";
  write_matrix_header(os, 'a', model.dim(), model.dim());
  write_matrix_header(os, 'b', model.dim(), model.num_inputs());
  os << kEol;
  for (int k = 0; k < model.size(); ++k) {
    os << format_double(model.tau(k));
    write_matrix_fields(os, model.a_samples()[k]);
    write_matrix_fields(os, model.b_samples()[k]);
    os << kEol;
  }
}

void write_gains_csv(std::ostream& os, const GainSchedule& gains) {
  const Matrix& k0 = gains.k_samples().front();
  os << "tau";
  write_matrix_header(os, 'k', k0.rows(), k0.cols());
  os << kEol;
  for (int k = 0; k < gains.size(); ++k) {
    os << format_double(gains.tau(k));
    write_matrix_fields(os, gains.k_samples()[k]);
    os << kEol;
  }
}

Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json to_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

Json to_json(const SingularityReport& r) {
  Json out;
  out["theta_s"] = r.theta_s;
  out["alpha_slope"] = r.alpha_slope;
  out["beta_s"] = r.beta_s;
  out["gamma_s"] = r.gamma_s;
  out["v_s"] = r.v_s ? Json(*r.v_s) : Json(nullptr);
  out["flags"] = {{"unique_zero", r.flags.unique_zero},
                  {"slope_positive", r.flags.slope_positive},
                  {"gamma_positive_on_interval", r.flags.gamma_positive_on_interval},
                  {"ratio_below_minus_half", r.flags.ratio_below_minus_half}};
  out["overall"] = r.overall;
  out["sign"] = r.sign;
  out["zeros"] = r.zeros;
  return out;
}

Json to_json(const FamilyParameters& k) { return {{"k1", k.k1}, {"k2", k.k2}, {"k3", k.k3}}; }

Json to_json(const NoVhcCertificate& cert) {
  Json out;
  out["verdict"] = to_string(cert.verdict);
  out["explanation"] = cert.explanation;
  Json records = Json::array();
  for (const CertificateRecord& r : cert.records) {
    records.push_back({{"t", r.time.t},
                       {"q", to_json(r.time.q)},
                       {"qdot", to_json(r.time.qdot)},
                       {"annihilator_residual", r.time.annihilator_residual},
                       {"velocity_norm", r.time.velocity_norm},
                       {"gravity_distance", r.time.gravity_distance},
                       {"hypotheses_hold", r.hypotheses_hold}});
  }
  out["singular_times"] = std::move(records);
  return out;
}

Json to_json(const AccessibilityRecord& rec) {
  return {{"q", to_json(rec.state.q)},
          {"qdot", to_json(rec.state.qdot)},
          {"determinant", rec.determinant},
          {"method", to_string(rec.method)}};
}

Json to_json(const GramianResult& g) { return {{"eigenvalues", to_json(Vector(g.eigenvalues))}, {"w", to_json(g.w)}}; }

Json to_json(const MonodromyResult& m) {
  Json eig = Json::array();
  for (const auto& z : m.eigenvalues) eig.push_back({{"real", z.real()}, {"imag", z.imag()}, {"abs", std::abs(z)}});
  return {{"eigenvalues", std::move(eig)}, {"spectral_radius", m.spectral_radius}, {"matrix", to_json(m.f)}};
}

}  // namespace vhcplan::io
