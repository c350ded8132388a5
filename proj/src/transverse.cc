#include "vhcplan/transverse.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

#include "vhcplan/errors.h"
#include "vhcplan/feasibility.h"
#include "vhcplan/numerics/ode.h"

namespace vhcplan {

namespace {

constexpr double kPi = std::numbers::pi;

// Into [-pi, pi).
double wrap_angle(double a) {
  double w = std::fmod(a + kPi, 2.0 * kPi);
  if (w < 0.0) w += 2.0 * kPi;
  return w - kPi;
}

Eigen::MatrixXd flatten(const std::vector<Matrix>& m) {
  const Eigen::Index rows = m.front().rows(), cols = m.front().cols();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(m.size()), rows * cols);
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (m[k].rows() != rows || m[k].cols() != cols || !m[k].allFinite()) {
      throw PreconditionError("matrix samples must be finite and share one shape");
    }
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) out(static_cast<Eigen::Index>(k), i * cols + j) = m[k](i, j);
    }
  }
  return out;
}

Matrix unflatten(const Eigen::RowVectorXd& v, Eigen::Index rows, Eigen::Index cols) {
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = v(i * cols + j);
  }
  return out;
}

double grid_tau(int k, int n) { return -kPi + 2.0 * kPi * k / n; }

}  // namespace

// TicTocGeometry

double TicTocGeometry::phase(const Vector& q) const { return q(0); }

RowVector TicTocGeometry::phase_gradient(const Vector&) const {
  RowVector g = RowVector::Zero(3);
  g(0) = 1.0;
  return g;
}

double TicTocGeometry::phase_curvature(const Vector&, const Vector&) const { return 0.0; }

Vector TicTocGeometry::constraint(const Vector& q) const { return candidate_h(q).h; }

Matrix TicTocGeometry::constraint_jacobian(const Vector& q) const { return candidate_h(q).dh; }

Vector TicTocGeometry::constraint_curvature(const Vector& q, const Vector& qdot) const {
  return candidate_h_curvature(q, qdot);
}

// VhcGeometry

VhcGeometry::VhcGeometry(ParametricVhc vhc, Vector origin, const Vector& tangent)
    : vhc_(std::move(vhc)), origin_(std::move(origin)) {
  const Eigen::Index n = origin_.size();
  if (tangent.size() != n || !(tangent.norm() > 1e-12)) {
    throw PreconditionError("VhcGeometry: tangent must be nonzero and match the configuration");
  }
  e_ = tangent.transpose() / tangent.squaredNorm();
  const Matrix q = Eigen::HouseholderQR<Matrix>(tangent).householderQ();
  basis_ = q.rightCols(n - 1);
}

double VhcGeometry::phase(const Vector& q) const { return e_.dot(q - origin_); }

RowVector VhcGeometry::phase_gradient(const Vector&) const { return e_; }

double VhcGeometry::phase_curvature(const Vector&, const Vector&) const { return 0.0; }

Vector VhcGeometry::constraint(const Vector& q) const {
  return basis_.transpose() * (q - vhc_.phi(phase(q)));
}

Matrix VhcGeometry::constraint_jacobian(const Vector& q) const {
  const Matrix id = Matrix::Identity(origin_.size(), origin_.size());
  return basis_.transpose() * (id - vhc_.dphi(phase(q)) * e_);
}

Vector VhcGeometry::constraint_curvature(const Vector& q, const Vector& qdot) const {
  const double xd = e_.dot(qdot);
  return -basis_.transpose() * vhc_.ddphi(phase(q)) * (xd * xd);
}

// Orbits

OrbitPoint TicTocOrbit::at(double tau) const {
  const double t = wrap_angle(tau);
  const ReferencePoint r = tic_toc_reference(t);
  OrbitPoint p;
  p.t = t;
  p.q = r.q;
  p.qdot = r.qdot;
  p.u = r.u;
  p.x = std::sin(t);
  p.x_dot = std::cos(t);
  p.dx_dtau = std::cos(t);
  p.dx_dot_dtau = -std::sin(t);
  return p;
}

double TicTocOrbit::period() const { return 2.0 * kPi; }

SampledOrbit::SampledOrbit(PeriodicTrajectory traj, std::shared_ptr<const ChartGeometry> geometry)
    : traj_(std::move(traj)), geometry_(std::move(geometry)) {
  if (!geometry_) throw PreconditionError("SampledOrbit: geometry required");
  const std::size_t n = traj_.samples().size();
  table_t_.reserve(n + 1);
  table_tau_.reserve(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = traj_.start() + traj_.period() * static_cast<double>(k) / n;
    double rate = 0.0;
    double angle = phase_angle(t, &rate);
    if (!(rate > 0.0)) throw PreconditionError("SampledOrbit: phase angle must increase along the orbit");
    if (!table_tau_.empty()) {
      while (angle <= table_tau_.back() - kPi) angle += 2.0 * kPi;
      while (angle > table_tau_.back() + kPi) angle -= 2.0 * kPi;
      if (!(angle > table_tau_.back())) {
        throw PreconditionError("SampledOrbit: phase angle must increase along the orbit");
      }
    }
    table_t_.push_back(t);
    table_tau_.push_back(angle);
  }
  if (std::abs(table_tau_.back() - table_tau_.front() - 2.0 * kPi) > 1e-6) {
    throw PreconditionError("SampledOrbit: orbit must wind once around the phase-plane origin");
  }
}

double SampledOrbit::phase_angle(double t, double* rate) const {
  const TrajectorySample s = traj_.at(t);
  const RowVector g = geometry_->phase_gradient(s.q);
  const double x = geometry_->phase(s.q);
  const double xd = g.dot(s.qdot);
  const double xdd = g.dot(s.qddot) + geometry_->phase_curvature(s.q, s.qdot);
  const double r2 = x * x + xd * xd;
  if (rate) *rate = (xd * xd - x * xdd) / r2;
  return std::atan2(x, xd);
}

OrbitPoint SampledOrbit::at(double tau) const {
  double target = tau;
  const double lo = table_tau_.front();
  target = lo + std::fmod(target - lo, 2.0 * kPi);
  if (target < lo) target += 2.0 * kPi;
  auto it = std::upper_bound(table_tau_.begin(), table_tau_.end(), target);
  const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(it - table_tau_.begin()), 1,
                                                table_tau_.size() - 1);
  const double w = (target - table_tau_[k - 1]) / (table_tau_[k] - table_tau_[k - 1]);
  double t = table_t_[k - 1] + w * (table_t_[k] - table_t_[k - 1]);
  for (int it_n = 0; it_n < 50; ++it_n) {
    double rate = 0.0;
    const double diff = wrap_angle(phase_angle(t, &rate) - target);
    if (!(rate > 0.0)) throw NumericalError("SampledOrbit: phase rate vanished");
    t -= diff / rate;
    if (std::abs(diff) < 1e-15) break;
  }
  const TrajectorySample s = traj_.at(t);
  const RowVector g = geometry_->phase_gradient(s.q);
  OrbitPoint p;
  p.t = t;
  p.q = s.q;
  p.qdot = s.qdot;
  p.u = s.u;
  p.x = geometry_->phase(s.q);
  p.x_dot = g.dot(s.qdot);
  const double xdd = g.dot(s.qddot) + geometry_->phase_curvature(s.q, s.qdot);
  const double tau_dot = (p.x_dot * p.x_dot - p.x * xdd) / (p.x * p.x + p.x_dot * p.x_dot);
  p.dx_dtau = p.x_dot / tau_dot;
  p.dx_dot_dtau = xdd / tau_dot;
  return p;
}

// TransverseChart

TransverseChart::TransverseChart(MechanicalSystem sys, std::shared_ptr<const ChartGeometry> geometry,
                                 std::shared_ptr<const OrbitReference> orbit, ChartOptions options)
    : sys_(std::move(sys)), geometry_(std::move(geometry)), orbit_(std::move(orbit)), options_(options) {
  if (!geometry_ || !orbit_) throw PreconditionError("TransverseChart: geometry and orbit required");
  if (geometry_->dof() != sys_.dof()) throw PreconditionError("TransverseChart: geometry/system mismatch");
  if (!(options_.tube_radius > 0.0)) throw PreconditionError("TransverseChart: tube radius must be positive");
}

TransverseState TransverseChart::forward(const PhaseState& s) const {
  const int n = sys_.dof();
  const RowVector g = geometry_->phase_gradient(s.q);
  const double x = geometry_->phase(s.q);
  const double xd = g.dot(s.qdot);
  TransverseState out;
  out.tau = wrap_angle(std::atan2(x, xd));
  const OrbitPoint ref = orbit_->at(out.tau);
  const Matrix dh = geometry_->constraint_jacobian(s.q);
  out.rho = Vector(2 * n - 1);
  out.rho.head(n - 1) = geometry_->constraint(s.q);
  out.rho.segment(n - 1, n - 1) = dh * s.qdot;
  out.rho(2 * n - 2) = (x - ref.x) * std::sin(out.tau) + (xd - ref.x_dot) * std::cos(out.tau);
  out.inside = (x != 0.0 || xd != 0.0) && out.rho.allFinite() && out.rho.norm() <= options_.tube_radius;
  return out;
}

Vector TransverseChart::residual(const PhaseState& s, double tau, const Vector& rho) const {
  const TransverseState f = forward(s);
  Vector r(rho.size() + 1);
  r(0) = wrap_angle(f.tau - tau);
  r.tail(rho.size()) = f.rho - rho;
  return r;
}

PhaseState TransverseChart::invert(double tau, const Vector& rho) const {
  const int n = sys_.dof();
  if (rho.size() != dim() || !rho.allFinite()) throw PreconditionError("invert: rho has the wrong size");
  if (rho.norm() > options_.tube_radius) throw PreconditionError("invert: rho outside the chart tube");
  const OrbitPoint seed = orbit_->at(tau);
  Vector x(2 * n);
  x << seed.q, seed.qdot;
  auto split = [n](const Vector& v) { return PhaseState{v.head(n), v.tail(n)}; };
  Vector r = residual(split(x), tau, rho);
  double norm = r.lpNorm<Eigen::Infinity>();
  for (int it = 0; it < options_.newton_iterations && norm >= options_.newton_tolerance; ++it) {
    Matrix jac(2 * n, 2 * n);
    for (int j = 0; j < 2 * n; ++j) {
      const double h = 1e-7 * (1.0 + std::abs(x(j)));
      Vector xp = x, xm = x;
      xp(j) += h;
      xm(j) -= h;
      jac.col(j) = (residual(split(xp), tau, rho) - residual(split(xm), tau, rho)) / (2.0 * h);
    }
    const Vector step = jac.partialPivLu().solve(-r);
    double lambda = 1.0;
    bool improved = false;
    while (lambda > 1e-4) {
      const Vector trial = x + lambda * step;
      const Vector rt = residual(split(trial), tau, rho);
      const double nt = rt.lpNorm<Eigen::Infinity>();
      if (std::isfinite(nt) && nt < norm) {
        x = trial;
        r = rt;
        norm = nt;
        improved = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!improved) break;
  }
  if (!(norm < 1e-12)) {
    std::ostringstream msg;
    msg << "invert: Newton did not converge (residual " << norm << ") at tau=" << tau
        << "; point likely outside the tube";
    throw NumericalError(msg.str());
  }
  return split(x);
}

TransverseChart::Rates TransverseChart::rates(const PhaseState& s, const Vector& u) const {
  const int n = sys_.dof();
  const Vector qdd = eval_accel(sys_, s, u);
  const RowVector g = geometry_->phase_gradient(s.q);
  const double x = geometry_->phase(s.q);
  const double xd = g.dot(s.qdot);
  const double xdd = g.dot(qdd) + geometry_->phase_curvature(s.q, s.qdot);
  const double r2 = x * x + xd * xd;
  Rates out;
  out.tau_dot = (xd * xd - x * xdd) / r2;
  const double tau = wrap_angle(std::atan2(x, xd));
  const OrbitPoint ref = orbit_->at(tau);
  const Matrix dh = geometry_->constraint_jacobian(s.q);
  const double st = std::sin(tau), ct = std::cos(tau), td = out.tau_dot;
  out.rho_dot = Vector(2 * n - 1);
  out.rho_dot.head(n - 1) = dh * s.qdot;
  out.rho_dot.segment(n - 1, n - 1) = dh * qdd + geometry_->constraint_curvature(s.q, s.qdot);
  out.rho_dot(2 * n - 2) = (xd - ref.dx_dtau * td) * st + (x - ref.x) * ct * td +
                           (xdd - ref.dx_dot_dtau * td) * ct - (xd - ref.x_dot) * st * td;
  return out;
}

std::optional<Vector> TransverseChart::dynamics(double tau, const Vector& rho, const Vector& w) const {
  const PhaseState s = invert(tau, rho);
  const Rates r = rates(s, reference_input(tau) + w);
  if (!(r.tau_dot > 0.0)) return std::nullopt;
  return Vector(r.rho_dot / r.tau_dot);
}

TransverseChart tic_toc_chart(ChartOptions options) {
  return TransverseChart(pvtol_model(), std::make_shared<TicTocGeometry>(), std::make_shared<TicTocOrbit>(),
                         options);
}

// LtvModel

LtvModel::LtvModel(std::vector<Matrix> a, std::vector<Matrix> b) : a_(std::move(a)), b_(std::move(b)) {
  if (a_.size() < 4 || a_.size() != b_.size()) throw PreconditionError("LtvModel: need matching A, B samples");
  if (a_.front().rows() != a_.front().cols() || b_.front().rows() != a_.front().rows()) {
    throw PreconditionError("LtvModel: inconsistent A, B shapes");
  }
  a_spline_ = numerics::PeriodicCubicSpline(flatten(a_), -kPi, 2.0 * kPi);
  b_spline_ = numerics::PeriodicCubicSpline(flatten(b_), -kPi, 2.0 * kPi);
}

double LtvModel::tau(int k) const { return grid_tau(k, size()); }

Matrix LtvModel::a(double tau) const { return unflatten(a_spline_(tau), dim(), dim()); }

Matrix LtvModel::b(double tau) const { return unflatten(b_spline_(tau), dim(), num_inputs()); }

namespace {

Vector central_difference(const std::function<std::optional<Vector>(double)>& f, double step,
                          int max_halvings) {
  for (int i = 0; i <= max_halvings; ++i, step *= 0.5) {
    const auto p1 = f(step), m1 = f(-step), p2 = f(0.5 * step), m2 = f(-0.5 * step);
    if (!p1 || !m1 || !p2 || !m2) continue;
    const Vector d1 = (*p1 - *m1) / (2.0 * step);
    const Vector d2 = (*p2 - *m2) / step;
    return (4.0 * d2 - d1) / 3.0;
  }
  throw NumericalError("linearize: phase rate non-positive under every perturbation step");
}

}  // namespace

LtvModel linearize(const TransverseChart& chart, int num_grid, const LinearizeOptions& options) {
  if (num_grid < 4 || num_grid % 2 != 0) throw PreconditionError("linearize: grid size must be even and >= 4");
  const int d = chart.dim();
  const int m = chart.num_inputs();
  std::vector<Matrix> a(num_grid, Matrix(d, d)), b(num_grid, Matrix(d, m));
  const Vector zero_rho = Vector::Zero(d);
  const Vector zero_w = Vector::Zero(m);
  for (int k = 0; k < num_grid; ++k) {
    const double tau = grid_tau(k, num_grid);
    for (int j = 0; j < d; ++j) {
      a[k].col(j) = central_difference(
          [&](double h) {
            Vector rho = zero_rho;
            rho(j) = h;
            return chart.dynamics(tau, rho, zero_w);
          },
          options.rho_step, options.max_step_halvings);
    }
    for (int j = 0; j < m; ++j) {
      b[k].col(j) = central_difference(
          [&](double h) {
            Vector w = zero_w;
            w(j) = h;
            return chart.dynamics(tau, zero_rho, w);
          },
          options.input_step, options.max_step_halvings);
    }
  }
  return LtvModel(std::move(a), std::move(b));
}

namespace {

using MatMap = Eigen::Map<Matrix>;
using ConstMatMap = Eigen::Map<const Matrix>;

}  // namespace

GramianResult gramian(const LtvModel& model) {
  const int d = model.dim();
  numerics::OdeState y(2 * d * d, 0.0);
  MatMap(y.data(), d, d).setIdentity();
  auto rhs = [&](const numerics::OdeState& x, numerics::OdeState& dx, double s) {
    const ConstMatMap psi(x.data(), d, d);
    const Matrix b = model.b(s);
    const Matrix psi_b = psi * b;
    MatMap(dx.data(), d, d) = -psi * model.a(s);
    MatMap(dx.data() + d * d, d, d) = psi_b * psi_b.transpose();
  };
  numerics::integrate_adaptive(rhs, y, 0.0, 2.0 * kPi, {1e-10, 1e-10});
  GramianResult out;
  const Matrix w = ConstMatMap(y.data() + d * d, d, d);
  out.w = 0.5 * (w + w.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(out.w, Eigen::EigenvaluesOnly);
  out.eigenvalues = es.eigenvalues().reverse();
  return out;
}

// GainSchedule

GainSchedule::GainSchedule(std::vector<Matrix> k, std::vector<Matrix> p) : k_(std::move(k)), p_(std::move(p)) {
  if (k_.size() < 4 || k_.size() != p_.size()) throw PreconditionError("GainSchedule: need matching K, P samples");
  k_spline_ = numerics::PeriodicCubicSpline(flatten(k_), -kPi, 2.0 * kPi);
  p_spline_ = numerics::PeriodicCubicSpline(flatten(p_), -kPi, 2.0 * kPi);
}

double GainSchedule::tau(int i) const { return grid_tau(i, size()); }

Matrix GainSchedule::k(double tau) const {
  return unflatten(k_spline_(tau), k_.front().rows(), k_.front().cols());
}

Matrix GainSchedule::p(double tau) const {
  return unflatten(p_spline_(tau), p_.front().rows(), p_.front().cols());
}

GainSchedule periodic_lqr(const LtvModel& model, const Matrix& q, const Matrix& r, const LqrOptions& options) {
  const int d = model.dim();
  const int m = model.num_inputs();
  if (q.rows() != d || q.cols() != d || r.rows() != m || r.cols() != m) {
    throw PreconditionError("periodic_lqr: weight dimensions do not match the model");
  }
  if ((q - q.transpose()).norm() > 1e-12 || (r - r.transpose()).norm() > 1e-12) {
    throw PreconditionError("periodic_lqr: weights must be symmetric");
  }
  if (Eigen::SelfAdjointEigenSolver<Matrix>(q).eigenvalues().minCoeff() < -1e-12) {
    throw PreconditionError("periodic_lqr: Q must be positive semidefinite");
  }
  Eigen::LLT<Matrix> r_llt(r);
  if (r_llt.info() != Eigen::Success) throw PreconditionError("periodic_lqr: R must be positive definite");

  const GramianResult w = gramian(model);
  if (!(w.eigenvalues.minCoeff() > options.min_gramian_eigenvalue)) {
    std::ostringstream msg;
    msg << "periodic_lqr: Gramian smallest eigenvalue " << w.eigenvalues.minCoeff() << " below "
        << options.min_gramian_eigenvalue;
    throw UncontrollableError(msg.str());
  }

  const Matrix r_inv = r_llt.solve(Matrix::Identity(m, m));
  auto rhs = [&](const numerics::OdeState& x, numerics::OdeState& dx, double s) {
    const ConstMatMap p(x.data(), d, d);
    const Matrix a = model.a(s);
    const Matrix b = model.b(s);
    const Matrix pb = p * b;
    MatMap(dx.data(), d, d) = -(a.transpose() * p + p * a - pb * r_inv * pb.transpose() + q);
  };

  const int n = model.size();
  std::vector<Matrix> p_nodes(n);
  Matrix p_end = q;
  for (int sweep = 1; sweep <= options.max_periods; ++sweep) {
    numerics::OdeState y(p_end.data(), p_end.data() + d * d);
    for (int k = n - 1; k >= 0; --k) {
      numerics::integrate_adaptive(rhs, y, grid_tau(k + 1, n), grid_tau(k, n), {1e-10, 1e-10});
      const Matrix p = ConstMatMap(y.data(), d, d);
      p_nodes[k] = 0.5 * (p + p.transpose());
    }
    const double change = (p_nodes[0] - p_end).lpNorm<Eigen::Infinity>();
    p_end = p_nodes[0];
    if (change < options.tolerance) {
      std::vector<Matrix> k_nodes(n);
      for (int k = 0; k < n; ++k) k_nodes[k] = -r_inv * model.b_samples()[k].transpose() * p_nodes[k];
      GainSchedule out(std::move(k_nodes), std::move(p_nodes));
      out.sweeps = sweep;
      return out;
    }
  }
  throw NumericalError("periodic Riccati did not converge");
}

Matrix transition(const LtvModel& model, const GainSchedule* gains, double tau0, double tau1) {
  const int d = model.dim();
  numerics::OdeState y(d * d, 0.0);
  MatMap(y.data(), d, d).setIdentity();
  auto rhs = [&](const numerics::OdeState& x, numerics::OdeState& dx, double s) {
    Matrix a = model.a(s);
    if (gains) a += model.b(s) * gains->k(s);
    MatMap(dx.data(), d, d) = a * ConstMatMap(x.data(), d, d);
  };
  numerics::integrate_adaptive(rhs, y, tau0, tau1, {1e-12, 1e-12});
  return ConstMatMap(y.data(), d, d);
}

MonodromyResult monodromy(const LtvModel& model, const GainSchedule* gains, double tau0) {
  if (gains && gains->size() != model.size()) throw PreconditionError("monodromy: gains and model grids differ");
  MonodromyResult out;
  out.f = transition(model, gains, tau0, tau0 + 2.0 * kPi);
  Eigen::EigenSolver<Matrix> es(out.f, false);
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) out.eigenvalues.push_back(es.eigenvalues()(i));
  std::sort(out.eigenvalues.begin(), out.eigenvalues.end(),
            [](const auto& a, const auto& b) { return std::abs(a) > std::abs(b); });
  out.spectral_radius = std::abs(out.eigenvalues.front());
  return out;
}

}  // namespace vhcplan
