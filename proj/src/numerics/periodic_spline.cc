#include "vhcplan/numerics/periodic_spline.h"

#include <cmath>

#include "vhcplan/errors.h"

namespace vhcplan::numerics {

namespace {

// Solves the cyclic system  m[k-1] + 4 m[k] + m[k+1] = rhs[k]  (indices mod N)
// column by column with the Sherman-Morrison correction of the Thomas
// algorithm.
Eigen::MatrixXd solve_cyclic(const Eigen::MatrixXd& rhs) {
  const int n = static_cast<int>(rhs.rows());
  if (n == 3) {
    Eigen::Matrix3d a;
    a << 4, 1, 1, 1, 4, 1, 1, 1, 4;
    return a.partialPivLu().solve(rhs);
  }
  // A = T + u v^T with u = (gamma, 0, ..., 0, 1), v = (1, 0, ..., 0, 1/gamma).
  const double gamma = -4.0;
  Eigen::VectorXd diag = Eigen::VectorXd::Constant(n, 4.0);
  diag(0) -= gamma;
  diag(n - 1) -= 1.0 / gamma;

  auto thomas = [&](Eigen::MatrixXd d) {
    Eigen::VectorXd c(n);
    c(0) = 1.0 / diag(0);
    d.row(0) /= diag(0);
    for (int i = 1; i < n; ++i) {
      const double m = diag(i) - c(i - 1);
      c(i) = 1.0 / m;
      d.row(i) = (d.row(i) - d.row(i - 1)) / m;
    }
    for (int i = n - 2; i >= 0; --i) d.row(i) -= c(i) * d.row(i + 1);
    return d;
  };

  Eigen::MatrixXd y = thomas(rhs);
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n, 1);
  u(0, 0) = gamma;
  u(n - 1, 0) = 1.0;
  const Eigen::VectorXd z = thomas(u).col(0);
  const double vz = z(0) + z(n - 1) / gamma;
  const Eigen::RowVectorXd vy = y.row(0) + y.row(n - 1) / gamma;
  return y - z * (vy / (1.0 + vz));
}

}  // namespace

PeriodicCubicSpline::PeriodicCubicSpline(Eigen::MatrixXd values, double origin,
                                         double period)
    : values_(std::move(values)), origin_(origin), period_(period) {
  const int n = static_cast<int>(values_.rows());
  if (n < 3) throw PreconditionError("PeriodicCubicSpline: need at least 3 samples");
  if (!(period > 0.0)) throw PreconditionError("PeriodicCubicSpline: period must be positive");
  step_ = period_ / n;
  Eigen::MatrixXd rhs(n, values_.cols());
  for (int k = 0; k < n; ++k) {
    const int prev = (k + n - 1) % n;
    const int next = (k + 1) % n;
    rhs.row(k) = 6.0 * (values_.row(next) - 2.0 * values_.row(k) + values_.row(prev)) /
                 (step_ * step_);
  }
  second_ = solve_cyclic(rhs);
}

void PeriodicCubicSpline::locate(double t, int* k, double* s) const {
  double u = std::fmod(t - origin_, period_);
  if (u < 0.0) u += period_;
  const int n = num_samples();
  int idx = static_cast<int>(std::floor(u / step_));
  if (idx >= n) idx = n - 1;
  *k = idx;
  *s = u - idx * step_;
}

Eigen::RowVectorXd PeriodicCubicSpline::operator()(double t) const {
  int k = 0;
  double s = 0.0;
  locate(t, &k, &s);
  const int next = (k + 1) % num_samples();
  const double h = step_;
  const double a = (h - s) / h;
  const double b = s / h;
  return a * values_.row(k) + b * values_.row(next) +
         ((a * a * a - a) * second_.row(k) + (b * b * b - b) * second_.row(next)) *
             (h * h / 6.0);
}

Eigen::RowVectorXd PeriodicCubicSpline::derivative(double t) const {
  int k = 0;
  double s = 0.0;
  locate(t, &k, &s);
  const int next = (k + 1) % num_samples();
  const double h = step_;
  const double a = (h - s) / h;
  const double b = s / h;
  return (values_.row(next) - values_.row(k)) / h +
         (-(3.0 * a * a - 1.0) * second_.row(k) + (3.0 * b * b - 1.0) * second_.row(next)) *
             (h / 6.0);
}

}  // namespace vhcplan::numerics
