#include "vhcplan/sim.h"

#include <cmath>
#include <sstream>

#include "vhcplan/errors.h"
#include "vhcplan/numerics/ode.h"

namespace vhcplan {

Vector feedback(const TransverseChart& chart, const GainSchedule* gains, const PhaseState& s) {
  const TransverseState ts = chart.forward(s);
  Vector u = chart.reference_input(ts.tau);
  if (gains) u += gains->k(ts.tau) * ts.rho;
  return u;
}

SimulationResult run_closed_loop(const TransverseChart& chart, const GainSchedule* gains,
                                 const PhaseState& x0, const SimulationOptions& options) {
  const MechanicalSystem& sys = chart.system();
  const int n = sys.dof();
  if (!(options.dt > 0.0) || !(options.horizon >= 0.0)) {
    throw PreconditionError("run_closed_loop: dt must be positive and the horizon non-negative");
  }
  if (x0.q.size() != n || x0.qdot.size() != n || !x0.all_finite()) {
    throw PreconditionError("run_closed_loop: initial state must be finite and match the system");
  }
  auto split = [n](const numerics::OdeState& x) {
    return PhaseState{Eigen::Map<const Vector>(x.data(), n), Eigen::Map<const Vector>(x.data() + n, n)};
  };

  SimulationResult result;
  result.dt = options.dt;
  result.closed_loop = gains != nullptr;
  numerics::OdeState x(2 * n);
  for (int i = 0; i < n; ++i) {
    x[i] = x0.q(i);
    x[n + i] = x0.qdot(i);
  }
  Vector held;
  auto rhs = [&](const numerics::OdeState& s, numerics::OdeState& ds, double) {
    const PhaseState ps = split(s);
    const Vector u = options.zero_order_hold ? held : feedback(chart, gains, ps);
    const Vector acc = eval_accel(sys, ps, u);
    for (int i = 0; i < n; ++i) {
      ds[i] = ps.qdot(i);
      ds[n + i] = acc(i);
    }
  };

  const long steps = std::lround(options.horizon / options.dt);
  for (long k = 0; k <= steps; ++k) {
    const double t = k * options.dt;
    const PhaseState ps = split(x);
    SimSample sample;
    sample.t = t;
    sample.q = ps.q;
    sample.qdot = ps.qdot;
    sample.u = feedback(chart, gains, ps);
    const TransverseState ts = chart.forward(ps);
    sample.tau = ts.tau;
    if (ts.inside) sample.rho = ts.rho;
    const bool bad_u = !sample.u.allFinite();
    double norm = 0.0;
    for (double v : x) norm += v * v;
    result.samples.push_back(std::move(sample));
    if (bad_u || !(std::sqrt(norm) <= options.divergence_bound)) {
      result.diverged = true;
      std::ostringstream msg;
      msg << "state diverged at t=" << t << (bad_u ? " (non-finite control)" : "");
      result.diagnostic = msg.str();
      break;
    }
    if (k == steps) break;
    held = result.samples.back().u;
    try {
      numerics::rk4_step(rhs, x, t, options.dt);
    } catch (const std::exception& e) {
      result.diverged = true;
      result.diagnostic = std::string("integration failed at t=") + std::to_string(t) + ": " + e.what();
      break;
    }
  }
  return result;
}

std::optional<double> orbit_error(const TransverseChart& chart, const PhaseState& s) {
  const TransverseState ts = chart.forward(s);
  if (!ts.inside) return std::nullopt;
  return ts.rho.norm();
}

}  // namespace vhcplan
