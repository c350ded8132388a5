#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "vhcplan/mech.h"
#include "vhcplan/trajectory.h"
#include "vhcplan/types.h"

namespace vhcplan {

/// A parametric virtual holonomic constraint q = phi(theta) with its first two
/// derivatives, defined on a closed parameter interval.
struct ParametricVhc {
  std::function<Vector(double)> phi;
  std::function<Vector(double)> dphi;
  std::function<Vector(double)> ddphi;
  Interval domain;
};

/// The constraint used for the tic-toc maneuver:
/// phi(theta) = (theta, -theta^2 / 2, pi/2 - atan(2 theta)).
ParametricVhc tic_toc_vhc(Interval domain = {-2.0, 2.0});

/// Coefficients of  alpha(theta) theta'' + beta(theta) theta'^2 + gamma(theta) = 0.
struct ReducedCoefficients {
  double alpha{0.0};
  double beta{0.0};
  double gamma{0.0};
};

/// alpha = b M phi', beta = b M phi'' + b C(phi, phi') phi', gamma = b G with
/// b the unit-norm left annihilator of B(phi(theta)). For systems without a
/// closed-form annihilator, b is carried by continuity from the midpoint of
/// the VHC domain. Throws PreconditionError outside the domain.
ReducedCoefficients reduced_coefficients(const MechanicalSystem& sys,
                                         const ParametricVhc& vhc, double theta);

/// Scalar reduced dynamics on a parameter interval.
class ReducedModel {
 public:
  using CoefficientFn = std::function<ReducedCoefficients(double theta)>;

  ReducedModel(CoefficientFn coefficients, Interval domain);

  static ReducedModel from_vhc(const MechanicalSystem& sys, const ParametricVhc& vhc);

  /// Throws PreconditionError when theta lies outside the domain.
  ReducedCoefficients operator()(double theta) const;
  const Interval& domain() const { return domain_; }

  /// Same coefficients, narrower (or equal) domain.
  ReducedModel restricted(Interval domain) const;

  /// Coefficient derivatives by a once-Richardson-extrapolated central
  /// difference with step 1e-6 (1 + |theta|).
  ReducedCoefficients derivative(double theta) const;

  /// theta'' from the reduced dynamics; undefined where alpha vanishes.
  double acceleration(double theta, double theta_dot) const;

 private:
  CoefficientFn coefficients_;
  Interval domain_;
};

struct SingularityFlags {
  bool unique_zero{false};
  bool slope_positive{false};
  bool gamma_positive_on_interval{false};
  bool ratio_below_minus_half{false};
};

/// Outcome of checking the existence conditions for smooth solutions through
/// a zero of alpha.
///
/// Coefficient values are reported after multiplying the model by `sign`
/// (the common sign of (alpha, beta, gamma) is a representation choice).
struct SingularityReport {
  double theta_s{0.0};
  double alpha_slope{0.0};
  double beta_s{0.0};
  double gamma_s{0.0};
  std::optional<double> v_s;  // sqrt(-gamma_s / beta_s) when beta_s < 0 < gamma_s
  double sign{1.0};
  std::vector<double> zeros;
  SingularityFlags flags;
  bool overall{false};
};

struct CrossingCheckOptions {
  int grid_points{2048};
  double zero_tolerance{1e-12};
  double merge_distance{1e-9};
  /// alpha'(theta_s) must exceed this; a flat zero is not a transversal crossing.
  double slope_tolerance{1e-8};
};

/// Locates the zeros of alpha on the model domain and evaluates the
/// conditions alpha'(theta_s) > 0, gamma > 0 on the closed interval and
/// beta(theta_s) / alpha'(theta_s) < -1/2, trying both global signs.
SingularityReport check_singular_crossing(const ReducedModel& model,
                                          const CrossingCheckOptions& options = {});

struct FamilyParameters {
  double k1{0.0};
  double k2{0.0};
  double k3{0.0};
};

/// phi(theta) = q_s + B(q_s) (k1, k2)^T theta + k3/2 B_perp(q_s)^T theta^2,
/// which places the zero of alpha at theta = 0, q = q_s. Rejects parameters
/// with phi'(0) = 0.
ParametricVhc family_vhc(const MechanicalSystem& sys, const Vector& q_s,
                         const FamilyParameters& k, Interval domain = {-1.0, 1.0});

struct FamilySearchBox {
  std::vector<double> k1;
  std::vector<double> k2;
  std::vector<double> k3;
  std::vector<double> theta_max;  // tried in the given order

  static FamilySearchBox defaults();
};

struct FamilyFit {
  FamilyParameters k;
  Interval interval;
  SingularityReport report;
};

/// Deterministic grid search for PVTOL family parameters passing
/// check_singular_crossing on a symmetric interval. Iterates theta_max
/// outermost, then k1, k2, k3 in box order, and returns the first passing
/// tuple, or nullopt when the box holds none. psi_s must lie in
/// (0, pi) U (pi, 2 pi); for psi_s > pi the signs of k1 and k3 are flipped.
std::optional<FamilyFit> find_family_parameters(double psi_s,
                                                const FamilySearchBox& box = FamilySearchBox::defaults());

/// A time at which B_perp M q' changes sign along a trajectory with q' != 0.
struct SingularTime {
  double t{0.0};
  Vector q;
  Vector qdot;
  double annihilator_residual{0.0};  // |B_perp M q'| after refinement
  double velocity_norm{0.0};
  double gravity_distance{0.0};  // dist(G(q), Im B(q))
};

struct SingularScanOptions {
  int min_samples{500};
  double velocity_threshold{1e-8};
  double merge_distance{1e-9};
};

/// Sign-change scan of B_perp(q) M(q) q' over the trajectory samples, refined
/// by bisection on the trajectory evaluator. Crossings where |q'| does not
/// exceed the velocity threshold are dropped. Times are reported in
/// [start, start + period).
std::vector<SingularTime> scan_singular_times(const MechanicalSystem& sys,
                                              const PeriodicTrajectory& traj,
                                              const SingularScanOptions& options = {});

}  // namespace vhcplan
