#pragma once

#include <functional>
#include <vector>

#include "vhcplan/types.h"

namespace vhcplan {

/// One sample of a planned motion.
struct TrajectorySample {
  double t{0.0};
  double theta{0.0};
  double theta_dot{0.0};
  Vector q;
  Vector qdot;
  Vector qddot;
  Vector u;
};

/// A T-periodic motion sampled uniformly on [t0, t0 + T), together with an
/// evaluator that can be queried at any time (used for root refinement).
class PeriodicTrajectory {
 public:
  using Evaluator = std::function<TrajectorySample(double t)>;

  PeriodicTrajectory() = default;
  PeriodicTrajectory(double period, std::vector<TrajectorySample> samples,
                     Evaluator evaluator);

  /// Builds a trajectory that interpolates `samples` with quintic Hermite
  /// segments in (q, q', q''), linear in u. Samples must be uniformly spaced
  /// over one period, starting at samples.front().t.
  static PeriodicTrajectory from_samples(double period,
                                         std::vector<TrajectorySample> samples);

  double period() const { return period_; }
  double start() const { return samples_.empty() ? 0.0 : samples_.front().t; }
  const std::vector<TrajectorySample>& samples() const { return samples_; }
  TrajectorySample at(double t) const { return evaluator_(t); }

 private:
  double period_{0.0};
  std::vector<TrajectorySample> samples_;
  Evaluator evaluator_;
};

/// The PVTOL tic-toc orbit on [0, 2 pi) with theta = sin t, evaluated in closed
/// form.
PeriodicTrajectory tic_toc_trajectory(int num_samples = 2048);

}  // namespace vhcplan
