#include "vhcplan/numerics/ode.h"

#include <cmath>
#include <string>

#include <boost/numeric/odeint.hpp>

#include "vhcplan/errors.h"

namespace vhcplan::numerics {

namespace odeint = boost::numeric::odeint;

namespace {

bool all_finite(const OdeState& x) {
  for (double v : x) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

std::size_t integrate_adaptive(const OdeRhs& rhs, OdeState& x, double t0,
                               double t1, const OdeTolerance& tol) {
  if (t0 == t1) return 0;
  if (!all_finite(x)) throw NumericalError("integrate_adaptive: non-finite initial state");
  const double span = t1 - t0;
  const double dt0 = std::copysign(std::min(1e-3, std::abs(span)), span);
  auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<OdeState>>(
      tol.abs, tol.rel);
  std::size_t steps = 0;
  auto observer = [&](const OdeState& state, double t) {
    if (++steps > tol.max_steps) {
      throw NumericalError("integrate_adaptive: step budget exhausted at t=" +
                           std::to_string(t));
    }
    if (!all_finite(state)) {
      throw NumericalError("integrate_adaptive: state became non-finite at t=" +
                           std::to_string(t));
    }
  };
  odeint::integrate_adaptive(stepper, rhs, x, t0, t1, dt0, observer);
  return steps;
}

void rk4_step(const OdeRhs& rhs, OdeState& x, double t, double dt) {
  static thread_local odeint::runge_kutta4<OdeState> stepper;
  stepper.do_step(rhs, x, t, dt);
}

}  // namespace vhcplan::numerics
