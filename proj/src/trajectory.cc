#include "vhcplan/trajectory.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <utility>

#include "vhcplan/errors.h"
#include "vhcplan/mech.h"
#include "vhcplan/numerics/hermite.h"

namespace vhcplan {

PeriodicTrajectory::PeriodicTrajectory(double period,
                                       std::vector<TrajectorySample> samples,
                                       Evaluator evaluator)
    : period_(period), samples_(std::move(samples)), evaluator_(std::move(evaluator)) {
  if (!(period_ > 0.0)) throw PreconditionError("PeriodicTrajectory: period must be positive");
  if (samples_.empty()) throw PreconditionError("PeriodicTrajectory: no samples");
  if (!evaluator_) throw PreconditionError("PeriodicTrajectory: evaluator required");
}

PeriodicTrajectory PeriodicTrajectory::from_samples(double period,
                                                    std::vector<TrajectorySample> samples) {
  if (samples.size() < 4) throw PreconditionError("from_samples: need at least 4 samples");
  auto shared = std::make_shared<const std::vector<TrajectorySample>>(samples);
  const double t0 = samples.front().t;
  const double step = period / static_cast<double>(samples.size());
  auto evaluator = [shared, t0, step, period](double t) {
    const auto& s = *shared;
    const int n = static_cast<int>(s.size());
    double u = std::fmod(t - t0, period);
    if (u < 0.0) u += period;
    int k = std::min(static_cast<int>(std::floor(u / step)), n - 1);
    const TrajectorySample& a = s[k];
    const TrajectorySample& b = s[(k + 1) % n];
    const double ta = k * step;
    const double tb = ta + step;
    using numerics::Jet;
    const Jet<Vector> q = numerics::quintic_hermite(ta, Jet<Vector>{a.q, a.qdot, a.qddot},
                                                    tb, Jet<Vector>{b.q, b.qdot, b.qddot}, u);
    const Jet<double> th = numerics::quintic_hermite(
        ta, Jet<double>{a.theta, a.theta_dot, 0.0}, tb,
        Jet<double>{b.theta, b.theta_dot, 0.0}, u);
    const double w = (u - ta) / step;
    TrajectorySample out;
    out.t = t;
    out.theta = th.value;
    out.theta_dot = th.first;
    out.q = q.value;
    out.qdot = q.first;
    out.qddot = q.second;
    out.u = (1.0 - w) * a.u + w * b.u;
    return out;
  };
  return PeriodicTrajectory(period, std::move(samples), std::move(evaluator));
}

PeriodicTrajectory tic_toc_trajectory(int num_samples) {
  if (num_samples < 4) throw PreconditionError("tic_toc_trajectory: need at least 4 samples");
  auto evaluator = [](double t) {
    const ReferencePoint r = tic_toc_reference(t);
    TrajectorySample s;
    s.t = t;
    s.theta = std::sin(t);
    s.theta_dot = std::cos(t);
    s.q = r.q;
    s.qdot = r.qdot;
    s.qddot = r.qddot;
    s.u = r.u;
    return s;
  };
  const double period = 2.0 * std::numbers::pi;
  std::vector<TrajectorySample> samples;
  samples.reserve(num_samples);
  for (int k = 0; k < num_samples; ++k) samples.push_back(evaluator(period * k / num_samples));
  return PeriodicTrajectory(period, std::move(samples), evaluator);
}

}  // namespace vhcplan
