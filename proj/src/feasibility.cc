#include "vhcplan/feasibility.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "vhcplan/errors.h"
#include "vhcplan/numerics/roots.h"

namespace vhcplan {

const char* to_string(CertificateVerdict verdict) {
  switch (verdict) {
    case CertificateVerdict::no_regular_vhc:
      return "no_regular_vhc";
    case CertificateVerdict::inconclusive:
      return "inconclusive";
  }
  return "unknown";
}

const char* to_string(AccessibilityMethod method) {
  switch (method) {
    case AccessibilityMethod::closed_form:
      return "closed_form";
    case AccessibilityMethod::numeric_bracket:
      return "numeric_bracket";
  }
  return "unknown";
}

NoVhcCertificate certify_no_regular_vhc(const MechanicalSystem& sys, const PeriodicTrajectory& traj,
                                        const SingularScanOptions& scan,
                                        const CertificateTolerances& tol) {
  NoVhcCertificate cert;
  int holding = 0;
  for (SingularTime& st : scan_singular_times(sys, traj, scan)) {
    CertificateRecord rec;
    rec.hypotheses_hold = st.annihilator_residual < tol.annihilator_residual &&
                          st.velocity_norm > tol.velocity_norm &&
                          st.gravity_distance > tol.gravity_distance;
    holding += rec.hypotheses_hold ? 1 : 0;
    rec.time = std::move(st);
    cert.records.push_back(std::move(rec));
  }
  std::ostringstream msg;
  if (holding > 0) {
    cert.verdict = CertificateVerdict::no_regular_vhc;
    msg << holding << " of " << cert.records.size()
        << " singular times satisfy the hypotheses; no regular VHC can hold this motion";
  } else if (cert.records.empty()) {
    msg << "no singular time along the motion; the test is inapplicable";
  } else {
    msg << "gravity can be balanced at every singular time; the test is inapplicable";
  }
  cert.explanation = msg.str();
  return cert;
}

namespace {

void require_pvtol_shape(const Vector& q) {
  if (q.size() != 3 || !q.allFinite()) throw PreconditionError("candidate_h: expects a finite PVTOL configuration");
}

}  // namespace

CandidateConstraint candidate_h(const Vector& q) {
  require_pvtol_shape(q);
  const double x = q(0);
  CandidateConstraint c;
  c.h = Vector(2);
  c.h << q(1) + 0.5 * x * x, q(2) - 0.5 * std::numbers::pi + std::atan(2.0 * x);
  c.dh = Matrix(2, 3);
  c.dh << x, 1.0, 0.0, 2.0 / (1.0 + 4.0 * x * x), 0.0, 1.0;
  return c;
}

Vector candidate_h_curvature(const Vector& q, const Vector& qdot) {
  require_pvtol_shape(q);
  const double x = q(0);
  const double xd = qdot(0);
  const double d = 1.0 + 4.0 * x * x;
  Vector out(2);
  out << xd * xd, -16.0 * x * xd * xd / (d * d);
  return out;
}

namespace {

using VectorField = std::function<Vector(const Vector&)>;

// [f, g] = Dg f - Df g by central differences.
VectorField bracket(const VectorField& f, const VectorField& g, double h) {
  return [f, g, h](const Vector& x) {
    const Vector fx = f(x);
    const Vector gx = g(x);
    const Vector dg_f = (g(x + h * fx) - g(x - h * fx)) / (2.0 * h);
    const Vector df_g = (f(x + h * gx) - f(x - h * gx)) / (2.0 * h);
    return Vector(dg_f - df_g);
  };
}

double numeric_det(const MechanicalSystem& sys, const PhaseState& state) {
  const int n = sys.dof();
  const int m = sys.num_inputs();
  const VectorField f = [&sys, n](const Vector& x) {
    const Vector q = x.head(n);
    const Vector qd = x.tail(n);
    Vector out(2 * n);
    out.head(n) = qd;
    out.tail(n) = sys.mass(q).llt().solve(-sys.coriolis(q, qd) * qd - sys.gravity(q));
    return out;
  };
  std::vector<VectorField> g;
  for (int i = 0; i < m; ++i) {
    g.push_back([&sys, n, i](const Vector& x) {
      const Vector q = x.head(n);
      Vector out = Vector::Zero(2 * n);
      out.tail(n) = sys.mass(q).llt().solve(sys.input_map(q).col(i));
      return out;
    });
  }
  const double h = 1e-5;
  Vector x(2 * n);
  x << state.q, state.qdot;
  Matrix psi(2 * n, 2 * n);
  int col = 0;
  psi.col(col++) = f(x);
  for (int i = 0; i < m; ++i) psi.col(col++) = g[i](x);
  for (int i = 0; i < m; ++i) psi.col(col++) = bracket(f, g[i], h)(x);
  psi.col(col++) = bracket(f, bracket(f, g[0], h), h)(x);
  if (!psi.allFinite()) throw NumericalError("accessibility_det: non-finite Lie bracket");
  return psi.determinant();
}

}  // namespace

AccessibilityRecord accessibility_det(const MechanicalSystem& sys, const PhaseState& state,
                                      AccessibilityMethod method) {
  if (state.q.size() != sys.dof() || state.qdot.size() != sys.dof() || !state.all_finite()) {
    throw PreconditionError("accessibility_det: state must be finite and match the system");
  }
  AccessibilityRecord rec{state, 0.0, method};
  if (method == AccessibilityMethod::closed_form) {
    if (sys.name() != "pvtol") throw PreconditionError("accessibility_det: closed form is PVTOL-only");
    const double psi = state.q(2);
    const double xd = state.qdot(0), zd = state.qdot(1), psid = state.qdot(2);
    rec.determinant =
        2.0 * psid * (-psid * xd * std::sin(psi) + psid * zd * std::cos(psi) + std::sin(psi));
  } else {
    rec.determinant = numeric_det(sys, state);
  }
  if (!std::isfinite(rec.determinant)) throw NumericalError("accessibility_det: non-finite determinant");
  return rec;
}

std::vector<double> accessibility_zeros(const MechanicalSystem& sys, const PeriodicTrajectory& traj,
                                        AccessibilityMethod method) {
  auto det_at = [&](double t) {
    const TrajectorySample s = traj.at(t);
    return accessibility_det(sys, {s.q, s.qdot}, method).determinant;
  };
  const auto& samples = traj.samples();
  const std::size_t n = samples.size();
  const double t0 = traj.start();
  const double period = traj.period();
  std::vector<double> values(n + 1);
  for (std::size_t k = 0; k <= n; ++k) values[k] = det_at(t0 + period * static_cast<double>(k) / n);
  std::vector<double> zeros;
  for (std::size_t k = 0; k < n; ++k) {
    const double ta = t0 + period * static_cast<double>(k) / n;
    const double tb = t0 + period * static_cast<double>(k + 1) / n;
    if (values[k] == 0.0) {
      zeros.push_back(ta);
    } else if (values[k] * values[k + 1] < 0.0) {
      zeros.push_back(numerics::bisect_root(det_at, ta, tb, 1e-14 * (1.0 + std::abs(tb))));
    }
  }
  return zeros;
}

}  // namespace vhcplan
