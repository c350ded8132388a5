#pragma once

#include <vector>

#include "vhcplan/mech.h"
#include "vhcplan/numerics/ode.h"
#include "vhcplan/trajectory.h"
#include "vhcplan/vhc.h"

namespace vhcplan {

struct ScalarSample {
  double t{0.0};
  double theta{0.0};
  double theta_dot{0.0};
  double theta_ddot{0.0};
};

/// Boundary data (theta_1, theta_1') and (theta_2, theta_2') with
/// theta_1 < theta_s < theta_2 and non-negative velocities.
struct BoundaryData {
  double theta1{0.0};
  double theta1_dot{0.0};
  double theta2{0.0};
  double theta2_dot{0.0};
};

/// A solution of the reduced dynamics on [t1, t2], time origin at the singular
/// crossing. Between samples it is interpolated by quintic Hermite segments
/// in (theta, theta', theta'').
class ScalarSolution {
 public:
  ScalarSolution(std::vector<ScalarSample> samples, double t_s, double theta_s);

  const std::vector<ScalarSample>& samples() const { return samples_; }
  double t_s() const { return t_s_; }
  double theta_s() const { return theta_s_; }
  double t_begin() const { return samples_.front().t; }
  double t_end() const { return samples_.back().t; }
  const ScalarSample& front() const { return samples_.front(); }
  const ScalarSample& back() const { return samples_.back(); }

  /// Throws PreconditionError outside [t_begin, t_end].
  ScalarSample at(double t) const;

  /// theta(-t): a solution as well, crossing theta_s with velocity -v_s.
  ScalarSolution time_reversed() const;

 private:
  std::vector<ScalarSample> samples_;
  double t_s_;
  double theta_s_;
};

/// Periodic extension of a rest-to-rest solution: theta(t) on [t1, t2]
/// followed by theta(2 t2 - t), period 2 (t2 - t1).
class PeriodicScalarSolution {
 public:
  explicit PeriodicScalarSolution(ScalarSolution base);

  double period() const { return period_; }
  double start() const { return base_.t_begin(); }
  const ScalarSolution& base() const { return base_; }

  ScalarSample at(double t) const;
  /// Samples of one period on [start, start + period).
  std::vector<ScalarSample> samples() const;

 private:
  ScalarSolution base_;
  double period_;
};

struct EscapeStep {
  double theta{0.0};
  double theta_dot{0.0};
};

/// theta'' at the singular point, from differentiating the reduced dynamics
/// once: a_s = -(beta' v_s^2 + gamma') / (alpha' + 2 beta).
double singular_acceleration(const ReducedModel& model, const SingularityReport& report);

/// Second-order Taylor step away from the singular point:
/// theta(t_s +- h) = theta_s +- v_s h + a_s h^2 / 2, theta' = v_s +- a_s h.
EscapeStep escape_singularity(const ReducedModel& model, const SingularityReport& report,
                              int direction, double h = 1e-4);

struct SolverOptions {
  /// Distance in theta from theta_s at which numerical integration hands over
  /// to the local Taylor bridge.
  double singular_gap{1e-5};
  /// Spacing of emitted samples.
  double sample_step{0.01};
  numerics::OdeTolerance tolerance{1e-10, 1e-10};
  double max_time{1e3};
};

/// Solution through the singular point meeting the boundary data.
///
/// Each branch is integrated from its boundary towards theta_s, the direction
/// in which neighbouring solutions contract onto the one crossing with the
/// forced velocity v_s; the last singular_gap of theta is bridged by a local
/// Taylor step. Throws PreconditionError for bad boundary data and
/// NumericalError when a boundary is unreachable.
ScalarSolution solve_boundary(const ReducedModel& model, const SingularityReport& report,
                              const BoundaryData& boundary, const SolverOptions& options = {});

/// Requires zero velocity at both ends.
PeriodicScalarSolution make_periodic(const ScalarSolution& solution);

/// q = phi(theta), q' = phi' theta', q'' = phi'' theta'^2 + phi' theta'' on a
/// uniform grid of one period starting at t = 0, with u from inverse_input.
/// Throws NumericalError when the consistency residual exceeds 1e-6.
PeriodicTrajectory lift(const MechanicalSystem& sys, const ParametricVhc& vhc,
                        const PeriodicScalarSolution& solution, int num_samples = 2048);

/// Replays the trajectory's feedforward input open loop through the full
/// dynamics for one period from its initial state and returns the infinity
/// norm of the state mismatch after one period.
double replay_closure(const MechanicalSystem& sys, const PeriodicTrajectory& traj);

}  // namespace vhcplan
