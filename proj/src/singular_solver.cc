#include "vhcplan/singular_solver.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "vhcplan/errors.h"
#include "vhcplan/numerics/hermite.h"

namespace vhcplan {

namespace {

numerics::Jet<double> jet(const ScalarSample& s) {
  return {s.theta, s.theta_dot, s.theta_ddot};
}

void require_passed(const SingularityReport& report) {
  if (!report.overall || !report.v_s) {
    throw PreconditionError("singular crossing conditions do not hold for this model");
  }
}

}  // namespace

ScalarSolution::ScalarSolution(std::vector<ScalarSample> samples, double t_s, double theta_s)
    : samples_(std::move(samples)), t_s_(t_s), theta_s_(theta_s) {
  if (samples_.size() < 2) throw PreconditionError("ScalarSolution: need at least two samples");
  for (std::size_t i = 1; i < samples_.size(); ++i) {
    if (!(samples_[i].t > samples_[i - 1].t)) {
      throw PreconditionError("ScalarSolution: sample times must increase strictly");
    }
  }
}

ScalarSample ScalarSolution::at(double t) const {
  if (t < t_begin() || t > t_end()) throw PreconditionError("ScalarSolution::at: t outside solution");
  auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                             [](double value, const ScalarSample& s) { return value < s.t; });
  if (it == samples_.end()) return samples_.back();
  if (it == samples_.begin()) return samples_.front();
  const ScalarSample& b = *it;
  const ScalarSample& a = *(it - 1);
  const numerics::Jet<double> j = numerics::quintic_hermite(a.t, jet(a), b.t, jet(b), t);
  return {t, j.value, j.first, j.second};
}

ScalarSolution ScalarSolution::time_reversed() const {
  std::vector<ScalarSample> reversed;
  reversed.reserve(samples_.size());
  for (auto it = samples_.rbegin(); it != samples_.rend(); ++it) {
    reversed.push_back({-it->t, it->theta, -it->theta_dot, it->theta_ddot});
  }
  return ScalarSolution(std::move(reversed), -t_s_, theta_s_);
}

PeriodicScalarSolution::PeriodicScalarSolution(ScalarSolution base)
    : base_(std::move(base)), period_(2.0 * (base_.t_end() - base_.t_begin())) {}

ScalarSample PeriodicScalarSolution::at(double t) const {
  const double t1 = base_.t_begin();
  const double t2 = base_.t_end();
  double u = std::fmod(t - t1, period_);
  if (u < 0.0) u += period_;
  u += t1;
  ScalarSample s;
  if (u <= t2) {
    s = base_.at(u);
  } else {
    const ScalarSample m = base_.at(std::max(t1, 2.0 * t2 - u));
    s = {u, m.theta, -m.theta_dot, m.theta_ddot};
  }
  s.t = t;
  return s;
}

std::vector<ScalarSample> PeriodicScalarSolution::samples() const {
  const auto& base = base_.samples();
  const double t2 = base_.t_end();
  std::vector<ScalarSample> out(base.begin(), base.end());
  for (auto it = base.rbegin() + 1; it + 1 != base.rend(); ++it) {
    out.push_back({2.0 * t2 - it->t, it->theta, -it->theta_dot, it->theta_ddot});
  }
  return out;
}

double singular_acceleration(const ReducedModel& model, const SingularityReport& report) {
  require_passed(report);
  const double v = *report.v_s;
  const ReducedCoefficients c = model(report.theta_s);
  const ReducedCoefficients d = model.derivative(report.theta_s);
  // Invariant under a common sign of (alpha, beta, gamma).
  return -(d.beta * v * v + d.gamma) / (d.alpha + 2.0 * c.beta);
}

EscapeStep escape_singularity(const ReducedModel& model, const SingularityReport& report,
                              int direction, double h) {
  require_passed(report);
  if (direction != 1 && direction != -1) throw PreconditionError("escape_singularity: direction must be +1 or -1");
  if (!(h > 0.0 && h <= 1e-3)) throw PreconditionError("escape_singularity: step must lie in (0, 1e-3]");
  const double v = *report.v_s;
  const double a = singular_acceleration(model, report);
  const double signed_h = direction * h;
  return {report.theta_s + v * signed_h + 0.5 * a * h * h, v + a * signed_h};
}

namespace {

struct Branch {
  std::vector<ScalarSample> samples;  // in integration order, local time
  double crossing_time{0.0};          // local time of theta = theta_s
};

// Integrates from a boundary towards theta_s. `time_direction` is +1 for the
// branch left of theta_s (forward in time) and -1 for the right branch. Time
// is the independent variable until theta_s is within two sample steps; the
// final approach uses theta itself, with state (theta'^2, t), so that it ends
// exactly at theta_s -+ singular_gap.
Branch integrate_branch(const ReducedModel& model, const SingularityReport& report,
                        double theta_b, double theta_dot_b, int time_direction,
                        double a_s, const SolverOptions& options) {
  const double theta_s = report.theta_s;
  const double target = theta_s - time_direction * options.singular_gap;
  auto rhs_time = [&model](const numerics::OdeState& x, numerics::OdeState& dx, double) {
    dx[0] = x[1];
    dx[1] = model.acceleration(x[0], x[1]);
  };
  auto rhs_theta = [&model](const numerics::OdeState& x, numerics::OdeState& dx, double theta) {
    const ReducedCoefficients c = model(theta);
    dx[0] = -2.0 * (c.beta * x[0] + c.gamma) / c.alpha;
    dx[1] = 1.0 / std::sqrt(x[0]);
  };
  auto make_sample = [&](double t, double theta, double theta_dot) {
    return ScalarSample{t, theta, theta_dot, model.acceleration(theta, theta_dot)};
  };

  Branch branch;
  numerics::OdeState x{theta_b, theta_dot_b};
  double t = 0.0;
  branch.samples.push_back(make_sample(t, x[0], x[1]));
  const double dt = time_direction * options.sample_step;
  while (true) {
    const double remaining = time_direction * (target - x[0]);
    const double accel = std::abs(branch.samples.back().theta_ddot);
    if (remaining <= 2.0 * x[1] * options.sample_step + accel * options.sample_step * options.sample_step &&
        x[1] > 0.0) {
      break;
    }
    numerics::OdeState next = x;
    numerics::integrate_adaptive(rhs_time, next, t, t + dt, options.tolerance);
    t += dt;
    if (!(next[1] > 0.0)) {
      std::ostringstream msg;
      msg << "solve_boundary: boundary theta=" << theta_b
          << " unreachable, theta' changed sign at theta=" << next[0] << " (t=" << t << ")";
      throw NumericalError(msg.str());
    }
    if (time_direction * (target - next[0]) <= 0.0) {
      throw NumericalError("solve_boundary: time step jumped past the singular point");
    }
    if (std::abs(t) > options.max_time) {
      throw NumericalError("solve_boundary: singular point not reached within max_time");
    }
    x = next;
    branch.samples.push_back(make_sample(t, x[0], x[1]));
  }

  // theta increases with t on both branches.
  numerics::OdeState y{x[1] * x[1], t};
  const double theta_start = x[0];
  constexpr int kApproachSamples = 4;
  for (int i = 1; i <= kApproachSamples; ++i) {
    const double th0 = theta_start + (target - theta_start) * (i - 1) / kApproachSamples;
    const double th1 = i == kApproachSamples ? target : theta_start + (target - theta_start) * i / kApproachSamples;
    numerics::integrate_adaptive(rhs_theta, y, th0, th1, options.tolerance);
    if (!(y[0] > 0.0)) throw NumericalError("solve_boundary: branch stalls before the singular point");
    branch.samples.push_back(make_sample(y[1], th1, std::sqrt(y[0])));
  }

  // -(beta theta'^2 + gamma) / alpha loses digits this close to theta_s;
  // interpolate between the previous approach sample and a_s instead.
  {
    ScalarSample& last = branch.samples.back();
    const ScalarSample& prev = branch.samples[branch.samples.size() - 2];
    last.theta_ddot = a_s + (prev.theta_ddot - a_s) * (last.theta - theta_s) / (prev.theta - theta_s);
  }

  const ScalarSample& e = branch.samples.back();
  const double gap = std::abs(theta_s - e.theta);
  const double disc = e.theta_dot * e.theta_dot + 2.0 * time_direction * e.theta_ddot * gap;
  if (disc < 0.0) throw NumericalError("solve_boundary: branch stalls before the singular point");
  const double bridge = 2.0 * gap / (e.theta_dot + std::sqrt(disc));
  branch.crossing_time = e.t + time_direction * bridge;

  // The inward branch must arrive with the forced crossing velocity.
  const double v_s = *report.v_s;
  const double predicted = v_s - time_direction * a_s * bridge;
  if (std::abs(e.theta_dot - predicted) > 1e-6 * (1.0 + v_s)) {
    std::ostringstream msg;
    msg << "solve_boundary: branch reaches theta_s with theta'=" << e.theta_dot << ", expected " << predicted;
    throw NumericalError(msg.str());
  }
  // A segment this short would turn integration noise in theta' into large
  // interpolated theta''; the next sample out spans the gap instead.
  branch.samples.pop_back();
  return branch;
}

}  // namespace

ScalarSolution solve_boundary(const ReducedModel& model, const SingularityReport& report,
                              const BoundaryData& boundary, const SolverOptions& options) {
  require_passed(report);
  const double theta_s = report.theta_s;
  if (!(boundary.theta1 < theta_s && theta_s < boundary.theta2)) {
    throw PreconditionError("solve_boundary: boundary values must bracket theta_s");
  }
  if (boundary.theta1_dot < 0.0 || boundary.theta2_dot < 0.0) {
    throw PreconditionError("solve_boundary: boundary velocities must be non-negative");
  }
  if (!model.domain().contains(boundary.theta1) || !model.domain().contains(boundary.theta2)) {
    throw PreconditionError("solve_boundary: boundary values outside the model domain");
  }
  if (theta_s - boundary.theta1 <= options.singular_gap ||
      boundary.theta2 - theta_s <= options.singular_gap) {
    throw PreconditionError("solve_boundary: boundary too close to theta_s");
  }
  for (int i = 0; i <= 256; ++i) {
    const double th = boundary.theta1 + (boundary.theta2 - boundary.theta1) * i / 256.0;
    if (!(report.sign * model(th).gamma > 0.0)) {
      throw PreconditionError("solve_boundary: gamma must stay positive between the boundaries");
    }
  }

  const double v = *report.v_s;
  const double a = singular_acceleration(model, report);
  const Branch left = integrate_branch(model, report, boundary.theta1, boundary.theta1_dot, +1, a, options);
  const Branch right = integrate_branch(model, report, boundary.theta2, boundary.theta2_dot, -1, a, options);

  std::vector<ScalarSample> samples;
  samples.reserve(left.samples.size() + right.samples.size() + 1);
  for (const ScalarSample& s : left.samples) {
    samples.push_back({s.t - left.crossing_time, s.theta, s.theta_dot, s.theta_ddot});
  }
  samples.push_back({0.0, theta_s, v, a});
  for (auto it = right.samples.rbegin(); it != right.samples.rend(); ++it) {
    samples.push_back({it->t - right.crossing_time, it->theta, it->theta_dot, it->theta_ddot});
  }

  return ScalarSolution(std::move(samples), 0.0, theta_s);
}

PeriodicScalarSolution make_periodic(const ScalarSolution& solution) {
  if (solution.front().theta_dot != 0.0 || solution.back().theta_dot != 0.0) {
    throw PreconditionError("make_periodic: endpoint velocities must be zero");
  }
  return PeriodicScalarSolution(solution);
}

PeriodicTrajectory lift(const MechanicalSystem& sys, const ParametricVhc& vhc,
                        const PeriodicScalarSolution& solution, int num_samples) {
  if (num_samples < 4) throw PreconditionError("lift: need at least 4 samples");
  for (const ScalarSample& s : solution.base().samples()) {
    if (!vhc.domain.contains(s.theta)) throw PreconditionError("lift: solution leaves the VHC domain");
  }
  auto evaluate = [sys, vhc, solution](double t) {
    const ScalarSample s = solution.at(t);
    const Vector d1 = vhc.dphi(s.theta);
    TrajectorySample out;
    out.t = t;
    out.theta = s.theta;
    out.theta_dot = s.theta_dot;
    out.q = vhc.phi(s.theta);
    out.qdot = d1 * s.theta_dot;
    out.qddot = vhc.ddphi(s.theta) * (s.theta_dot * s.theta_dot) + d1 * s.theta_ddot;
    out.u = inverse_input(sys, out.q, out.qdot, out.qddot).u;
    return out;
  };
  const double period = solution.period();
  std::vector<TrajectorySample> samples;
  samples.reserve(num_samples);
  for (int k = 0; k < num_samples; ++k) {
    const double t = period * k / num_samples;
    TrajectorySample s = evaluate(t);
    const double residual = inverse_input(sys, s.q, s.qdot, s.qddot).residual;
    if (!(residual <= 1e-6)) {
      std::ostringstream msg;
      msg << "lift: VHC/solution inconsistent, residual " << residual << " at t=" << t;
      throw NumericalError(msg.str());
    }
    samples.push_back(std::move(s));
  }
  return PeriodicTrajectory(period, std::move(samples), evaluate);
}

double replay_closure(const MechanicalSystem& sys, const PeriodicTrajectory& traj) {
  const int n = sys.dof();
  const TrajectorySample start = traj.at(traj.start());
  numerics::OdeState x(2 * n);
  for (int i = 0; i < n; ++i) {
    x[i] = start.q(i);
    x[n + i] = start.qdot(i);
  }
  auto rhs = [&](const numerics::OdeState& s, numerics::OdeState& ds, double t) {
    PhaseState ps{Eigen::Map<const Vector>(s.data(), n), Eigen::Map<const Vector>(s.data() + n, n)};
    const Vector acc = eval_accel(sys, ps, traj.at(t).u);
    for (int i = 0; i < n; ++i) {
      ds[i] = ps.qdot(i);
      ds[n + i] = acc(i);
    }
  };
  numerics::integrate_adaptive(rhs, x, traj.start(), traj.start() + traj.period(),
                               {1e-12, 1e-12, 2'000'000});
  double err = 0.0;
  for (int i = 0; i < n; ++i) {
    err = std::max(err, std::abs(x[i] - start.q(i)));
    err = std::max(err, std::abs(x[n + i] - start.qdot(i)));
  }
  return err;
}

}  // namespace vhcplan
