#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace vhcplan::numerics {

using OdeState = std::vector<double>;
/// dxdt = f(x, t), written into the second argument.
using OdeRhs = std::function<void(const OdeState& x, OdeState& dxdt, double t)>;

struct OdeTolerance {
  double abs{1e-10};
  double rel{1e-10};
  std::size_t max_steps{2'000'000};
};

/// Integrates x from t0 to t1 (either direction) with an adaptive
/// Dormand-Prince 5(4) scheme, landing exactly on t1. Throws NumericalError if
/// the state becomes non-finite or the step budget is exhausted.
std::size_t integrate_adaptive(const OdeRhs& rhs, OdeState& x, double t0,
                               double t1, const OdeTolerance& tol = {});

/// One classical fourth-order Runge-Kutta step of size dt.
void rk4_step(const OdeRhs& rhs, OdeState& x, double t, double dt);

}  // namespace vhcplan::numerics
