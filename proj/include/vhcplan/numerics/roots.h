#pragma once

#include <cmath>
#include <functional>
#include <utility>

#include <boost/math/tools/roots.hpp>

namespace vhcplan::numerics {

/// Bisection on a bracket [a, b] with f(a) f(b) <= 0, stopped once the bracket
/// is narrower than `width`. Returns the midpoint of the final bracket, or the
/// endpoint of smaller |f| when rounding has erased the sign change.
inline double bisect_root(const std::function<double(double)>& f, double a,
                          double b, double width = 1e-14) {
  const double fa = f(a);
  const double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  // Sign information lost to rounding at an endpoint: the root sits there.
  if ((fa > 0.0) == (fb > 0.0)) return std::abs(fa) < std::abs(fb) ? a : b;
  auto done = [width](double lo, double hi) { return std::abs(hi - lo) <= width; };
  boost::uintmax_t max_iter = 200;
  const std::pair<double, double> r =
      boost::math::tools::bisect(f, a, b, done, max_iter);
  return 0.5 * (r.first + r.second);
}

}  // namespace vhcplan::numerics
