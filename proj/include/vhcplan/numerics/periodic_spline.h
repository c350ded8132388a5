#pragma once

#include <Eigen/Dense>

namespace vhcplan::numerics {

/// Periodic cubic spline through uniformly spaced vector-valued samples.
///
/// Row k of `values` is the sample at `origin + k * period / N`; the sample at
/// `origin + period` is taken to equal row 0. Every column is interpolated
/// independently with C2 periodic end conditions.
class PeriodicCubicSpline {
 public:
  PeriodicCubicSpline() = default;
  PeriodicCubicSpline(Eigen::MatrixXd values, double origin, double period);

  Eigen::RowVectorXd operator()(double t) const;
  Eigen::RowVectorXd derivative(double t) const;

  int num_samples() const { return static_cast<int>(values_.rows()); }
  int num_columns() const { return static_cast<int>(values_.cols()); }
  double period() const { return period_; }
  double origin() const { return origin_; }

 private:
  void locate(double t, int* k, double* s) const;

  Eigen::MatrixXd values_;
  Eigen::MatrixXd second_;  // second derivatives at the nodes
  double origin_{0.0};
  double period_{1.0};
  double step_{1.0};
};

}  // namespace vhcplan::numerics
