#include "vhcplan/numerics/hermite.h"

namespace vhcplan::numerics {

namespace {

// Quintic Hermite basis on the unit interval, with derivatives in s.
struct Basis {
  double h[6];
  double d1[6];
  double d2[6];
};

Basis basis(double s) {
  const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
  Basis b{};
  b.h[0] = 1 - 10 * s3 + 15 * s4 - 6 * s5;
  b.h[1] = s - 6 * s3 + 8 * s4 - 3 * s5;
  b.h[2] = 0.5 * (s2 - 3 * s3 + 3 * s4 - s5);
  b.h[3] = 10 * s3 - 15 * s4 + 6 * s5;
  b.h[4] = -4 * s3 + 7 * s4 - 3 * s5;
  b.h[5] = 0.5 * (s3 - 2 * s4 + s5);

  b.d1[0] = -30 * s2 + 60 * s3 - 30 * s4;
  b.d1[1] = 1 - 18 * s2 + 32 * s3 - 15 * s4;
  b.d1[2] = 0.5 * (2 * s - 9 * s2 + 12 * s3 - 5 * s4);
  b.d1[3] = 30 * s2 - 60 * s3 + 30 * s4;
  b.d1[4] = -12 * s2 + 28 * s3 - 15 * s4;
  b.d1[5] = 0.5 * (3 * s2 - 8 * s3 + 5 * s4);

  b.d2[0] = -60 * s + 180 * s2 - 120 * s3;
  b.d2[1] = -36 * s + 96 * s2 - 60 * s3;
  b.d2[2] = 0.5 * (2 - 18 * s + 36 * s2 - 20 * s3);
  b.d2[3] = 60 * s - 180 * s2 + 120 * s3;
  b.d2[4] = -24 * s + 84 * s2 - 60 * s3;
  b.d2[5] = 0.5 * (6 * s - 24 * s2 + 20 * s3);
  return b;
}

template <typename T>
Jet<T> evaluate(double t0, const Jet<T>& a, double t1, const Jet<T>& b, double t) {
  const double h = t1 - t0;
  const double s = (t - t0) / h;
  const Basis w = basis(s);
  const T da = a.first * h;
  const T db = b.first * h;
  const T dda = a.second * (h * h);
  const T ddb = b.second * (h * h);
  Jet<T> out{
      w.h[0] * a.value + w.h[1] * da + w.h[2] * dda + w.h[3] * b.value + w.h[4] * db +
          w.h[5] * ddb,
      (w.d1[0] * a.value + w.d1[1] * da + w.d1[2] * dda + w.d1[3] * b.value +
       w.d1[4] * db + w.d1[5] * ddb) /
          h,
      (w.d2[0] * a.value + w.d2[1] * da + w.d2[2] * dda + w.d2[3] * b.value +
       w.d2[4] * db + w.d2[5] * ddb) /
          (h * h)};
  return out;
}

}  // namespace

Jet<double> quintic_hermite(double t0, const Jet<double>& a, double t1,
                            const Jet<double>& b, double t) {
  return evaluate(t0, a, t1, b, t);
}

Jet<Eigen::VectorXd> quintic_hermite(double t0, const Jet<Eigen::VectorXd>& a,
                                     double t1, const Jet<Eigen::VectorXd>& b,
                                     double t) {
  return evaluate(t0, a, t1, b, t);
}

}  // namespace vhcplan::numerics
