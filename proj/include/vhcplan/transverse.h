#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <vector>

#include "vhcplan/mech.h"
#include "vhcplan/numerics/periodic_spline.h"
#include "vhcplan/trajectory.h"
#include "vhcplan/types.h"
#include "vhcplan/vhc.h"

namespace vhcplan {

/// Geometry behind a transverse chart: a scalar phase function X(q) whose
/// phase plane (X, X') the orbit encircles, and n - 1 constraint functions
/// h(q) that vanish along the orbit.
class ChartGeometry {
 public:
  virtual ~ChartGeometry() = default;

  virtual int dof() const = 0;
  virtual double phase(const Vector& q) const = 0;
  virtual RowVector phase_gradient(const Vector& q) const = 0;
  /// d/dt (dX(q)) q'.
  virtual double phase_curvature(const Vector& q, const Vector& qdot) const = 0;
  virtual Vector constraint(const Vector& q) const = 0;
  virtual Matrix constraint_jacobian(const Vector& q) const = 0;
  /// d/dt (dh(q)) q'.
  virtual Vector constraint_curvature(const Vector& q, const Vector& qdot) const = 0;
};

/// X = x and the candidate constraint h(q) = (z + x^2/2, psi - pi/2 + atan 2x).
class TicTocGeometry final : public ChartGeometry {
 public:
  int dof() const override { return 3; }
  double phase(const Vector& q) const override;
  RowVector phase_gradient(const Vector& q) const override;
  double phase_curvature(const Vector& q, const Vector& qdot) const override;
  Vector constraint(const Vector& q) const override;
  Matrix constraint_jacobian(const Vector& q) const override;
  Vector constraint_curvature(const Vector& q, const Vector& qdot) const override;
};

/// Geometry induced by a VHC whose parameter is a linear function of q:
/// X(q) = e (q - origin) with e phi(theta) - e origin = theta, and
/// h(q) = E^T (q - phi(X(q))) with E an orthonormal basis of e's complement.
class VhcGeometry final : public ChartGeometry {
 public:
  /// `tangent` is phi'(0) for a curve phi(theta) = origin + tangent theta +
  /// (terms orthogonal to tangent).
  VhcGeometry(ParametricVhc vhc, Vector origin, const Vector& tangent);

  int dof() const override { return static_cast<int>(origin_.size()); }
  double phase(const Vector& q) const override;
  RowVector phase_gradient(const Vector& q) const override;
  double phase_curvature(const Vector& q, const Vector& qdot) const override;
  Vector constraint(const Vector& q) const override;
  Matrix constraint_jacobian(const Vector& q) const override;
  Vector constraint_curvature(const Vector& q, const Vector& qdot) const override;

 private:
  ParametricVhc vhc_;
  Vector origin_;
  RowVector e_;
  Matrix basis_;  // n x (n - 1)
};

/// Point of the reference orbit at phase angle tau.
struct OrbitPoint {
  double t{0.0};
  Vector q;
  Vector qdot;
  Vector u;
  double x{0.0};       // X(q*)
  double x_dot{0.0};   // X'(q*)
  double dx_dtau{0.0};
  double dx_dot_dtau{0.0};
};

class OrbitReference {
 public:
  virtual ~OrbitReference() = default;
  /// tau in any real; wrapped into one period.
  virtual OrbitPoint at(double tau) const = 0;
  virtual double period() const = 0;
};

/// Tic-toc orbit in closed form; t*(tau) = tau.
class TicTocOrbit final : public OrbitReference {
 public:
  OrbitPoint at(double tau) const override;
  double period() const override;
};

/// Orbit given by a sampled trajectory. t*(tau) is found from a monotone table
/// over the samples and refined by Newton on the trajectory evaluator. Throws
/// PreconditionError when the phase angle is not strictly increasing along
/// the samples.
class SampledOrbit final : public OrbitReference {
 public:
  SampledOrbit(PeriodicTrajectory traj, std::shared_ptr<const ChartGeometry> geometry);
  OrbitPoint at(double tau) const override;
  double period() const override { return traj_.period(); }

 private:
  double phase_angle(double t, double* rate) const;

  PeriodicTrajectory traj_;
  std::shared_ptr<const ChartGeometry> geometry_;
  std::vector<double> table_t_;
  std::vector<double> table_tau_;  // unwrapped, strictly increasing
};

struct TransverseState {
  double tau{0.0};
  Vector rho;
  bool inside{false};
};

struct ChartOptions {
  double tube_radius{2.0};
  double newton_tolerance{1e-13};
  int newton_iterations{50};
};

/// Chart (q, q') -> (tau, rho) with tau = atan2(X, X'), rho = (h, dh q',
/// (X - X*(tau)) sin tau + (X' - X*'(tau)) cos tau).
class TransverseChart {
 public:
  TransverseChart(MechanicalSystem sys, std::shared_ptr<const ChartGeometry> geometry,
                  std::shared_ptr<const OrbitReference> orbit, ChartOptions options = {});

  const MechanicalSystem& system() const { return sys_; }
  const OrbitReference& orbit() const { return *orbit_; }
  const ChartGeometry& geometry() const { return *geometry_; }
  const ChartOptions& options() const { return options_; }
  int dim() const { return 2 * sys_.dof() - 1; }
  int num_inputs() const { return sys_.num_inputs(); }

  /// tau in [-pi, pi). `inside` is false when |rho| exceeds the tube radius
  /// or (X, X') = 0.
  TransverseState forward(const PhaseState& s) const;

  /// Damped Newton seeded at the orbit point. Throws PreconditionError when
  /// |rho| exceeds the tube radius and NumericalError when Newton fails.
  PhaseState invert(double tau, const Vector& rho) const;

  /// tau' and rho' under input u.
  struct Rates {
    double tau_dot{0.0};
    Vector rho_dot;
  };
  Rates rates(const PhaseState& s, const Vector& u) const;

  /// d rho / d tau at (tau, rho) with u = u*(tau) + w; nullopt when tau' <= 0.
  std::optional<Vector> dynamics(double tau, const Vector& rho, const Vector& w) const;

  Vector reference_input(double tau) const { return orbit_->at(tau).u; }

 private:
  Vector residual(const PhaseState& s, double tau, const Vector& rho) const;

  MechanicalSystem sys_;
  std::shared_ptr<const ChartGeometry> geometry_;
  std::shared_ptr<const OrbitReference> orbit_;
  ChartOptions options_;
};

/// The PVTOL tic-toc chart with closed-form orbit.
TransverseChart tic_toc_chart(ChartOptions options = {});

/// rho = 0 section as a 2 pi periodic linear system in tau, sampled on
/// tau_k = -pi + 2 pi k / N and interpolated by periodic cubic splines.
class LtvModel {
 public:
  LtvModel(std::vector<Matrix> a, std::vector<Matrix> b);

  int size() const { return static_cast<int>(a_.size()); }
  int dim() const { return static_cast<int>(a_.front().rows()); }
  int num_inputs() const { return static_cast<int>(b_.front().cols()); }
  double tau(int k) const;
  const std::vector<Matrix>& a_samples() const { return a_; }
  const std::vector<Matrix>& b_samples() const { return b_; }
  Matrix a(double tau) const;
  Matrix b(double tau) const;

 private:
  std::vector<Matrix> a_;
  std::vector<Matrix> b_;
  numerics::PeriodicCubicSpline a_spline_;
  numerics::PeriodicCubicSpline b_spline_;
};

struct LinearizeOptions {
  double rho_step{1e-6};
  double input_step{1e-4};
  int max_step_halvings{10};
};

/// Central differences of chart.dynamics, Richardson-extrapolated once. N must
/// be even and at least 4.
LtvModel linearize(const TransverseChart& chart, int num_grid, const LinearizeOptions& options = {});

struct GramianResult {
  Matrix w;
  Eigen::VectorXd eigenvalues;  // descending
};

/// W = int_0^{2 pi} Phi(0, s) B(s) B(s)^T Phi(0, s)^T ds.
GramianResult gramian(const LtvModel& model);

struct LqrOptions {
  double tolerance{1e-8};
  int max_periods{50};
  double min_gramian_eigenvalue{1e-6};
};

/// Periodic gain schedule on the model grid, u = u* + K(tau) rho.
class GainSchedule {
 public:
  GainSchedule(std::vector<Matrix> k, std::vector<Matrix> p);

  int size() const { return static_cast<int>(k_.size()); }
  double tau(int i) const;
  const std::vector<Matrix>& k_samples() const { return k_; }
  const std::vector<Matrix>& p_samples() const { return p_; }
  Matrix k(double tau) const;
  Matrix p(double tau) const;
  int sweeps{0};

 private:
  std::vector<Matrix> k_;
  std::vector<Matrix> p_;
  numerics::PeriodicCubicSpline k_spline_;
  numerics::PeriodicCubicSpline p_spline_;
};

/// Backward sweeps of -P' = A^T P + P A - P B R^{-1} B^T P + Q over one period
/// from P = Q until the period map moves P by less than the tolerance; then
/// K = -R^{-1} B^T P. Throws UncontrollableError when the Gramian's smallest
/// eigenvalue is below the threshold and NumericalError without convergence.
GainSchedule periodic_lqr(const LtvModel& model, const Matrix& q, const Matrix& r,
                          const LqrOptions& options = {});

/// Transition matrix of rho' = (A + B K) rho from tau0 to tau1 (open loop when
/// gains is null).
Matrix transition(const LtvModel& model, const GainSchedule* gains, double tau0, double tau1);

struct MonodromyResult {
  Matrix f;
  std::vector<std::complex<double>> eigenvalues;  // descending modulus
  double spectral_radius{0.0};
};

MonodromyResult monodromy(const LtvModel& model, const GainSchedule* gains, double tau0 = 0.0);

}  // namespace vhcplan
