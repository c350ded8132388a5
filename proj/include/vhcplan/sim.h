#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vhcplan/mech.h"
#include "vhcplan/transverse.h"
#include "vhcplan/types.h"

namespace vhcplan {

struct SimSample {
  double t{0.0};
  Vector q;
  Vector qdot;
  Vector u;  // control applied at the start of the step
  double tau{0.0};
  std::optional<Vector> rho;  // absent outside the chart tube
};

struct SimulationOptions {
  double dt{0.01};
  double horizon{6.0 * 3.14159265358979323846};
  /// Hold u over each step instead of re-evaluating it at every stage.
  bool zero_order_hold{false};
  double divergence_bound{1e6};
};

struct SimulationResult {
  double dt{0.0};
  std::vector<SimSample> samples;
  bool diverged{false};
  std::string diagnostic;
  bool closed_loop{true};
};

/// u = u*(tau) + K(tau) rho with (tau, rho) from the chart; u = u*(tau) when
/// gains is null.
Vector feedback(const TransverseChart& chart, const GainSchedule* gains, const PhaseState& s);

/// Fixed-step classical Runge-Kutta integration of the closed loop over
/// [0, horizon]. Stops early when |(q, q')| exceeds the divergence bound or u
/// becomes non-finite.
SimulationResult run_closed_loop(const TransverseChart& chart, const GainSchedule* gains,
                                 const PhaseState& x0, const SimulationOptions& options = {});

/// |rho| at the state, or nullopt outside the chart tube.
std::optional<double> orbit_error(const TransverseChart& chart, const PhaseState& s);

}  // namespace vhcplan
