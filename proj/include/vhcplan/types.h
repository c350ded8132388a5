#pragma once

#include <Eigen/Dense>

namespace vhcplan {

using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Matrix = Eigen::MatrixXd;

/// Closed interval [lo, hi] on the real line.
struct Interval {
  double lo{0.0};
  double hi{0.0};

  bool contains(double x) const { return x >= lo && x <= hi; }
  double length() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
};

/// Generalized coordinates and velocities of a mechanical system.
struct PhaseState {
  Vector q;
  Vector qdot;

  bool all_finite() const { return q.allFinite() && qdot.allFinite(); }
};

}  // namespace vhcplan
