#pragma once

#include <Eigen/Dense>

namespace vhcplan::numerics {

/// Value and first two derivatives of a quintic Hermite interpolant.
template <typename T>
struct Jet {
  T value;
  T first;
  T second;
};

/// Quintic Hermite interpolation on [t0, t1] matching value, first and second
/// derivative at both ends. Exact for polynomials of degree five.
Jet<double> quintic_hermite(double t0, const Jet<double>& a, double t1,
                            const Jet<double>& b, double t);

Jet<Eigen::VectorXd> quintic_hermite(double t0, const Jet<Eigen::VectorXd>& a,
                                     double t1, const Jet<Eigen::VectorXd>& b,
                                     double t);

}  // namespace vhcplan::numerics
