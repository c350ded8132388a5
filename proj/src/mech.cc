#include "vhcplan/mech.h"

#include <cmath>
#include <numbers>
#include <utility>

#include "vhcplan/errors.h"

namespace vhcplan {

MechanicalSystem::MechanicalSystem(std::string name, int n, MassFn mass,
                                   CoriolisFn coriolis, GravityFn gravity,
                                   InputMapFn input_map, AnnihilatorFn annihilator)
    : name_(std::move(name)),
      n_(n),
      mass_(std::move(mass)),
      coriolis_(std::move(coriolis)),
      gravity_(std::move(gravity)),
      input_map_(std::move(input_map)),
      annihilator_(std::move(annihilator)) {
  if (n_ < 2) throw PreconditionError("MechanicalSystem: need n >= 2");
  if (!mass_ || !coriolis_ || !gravity_ || !input_map_) {
    throw PreconditionError("MechanicalSystem: all evaluators are required");
  }
}

Matrix MechanicalSystem::mass(const Vector& q) const {
  Matrix m = mass_(q);
  if (m.rows() != n_ || m.cols() != n_) throw ModelInvariantError("mass matrix has wrong shape");
  return m;
}

Matrix MechanicalSystem::coriolis(const Vector& q, const Vector& qdot) const {
  Matrix c = coriolis_(q, qdot);
  if (c.rows() != n_ || c.cols() != n_) throw ModelInvariantError("Coriolis matrix has wrong shape");
  return c;
}

Vector MechanicalSystem::gravity(const Vector& q) const {
  Vector g = gravity_(q);
  if (g.size() != n_) throw ModelInvariantError("gravity vector has wrong size");
  return g;
}

Matrix MechanicalSystem::input_map(const Vector& q) const {
  Matrix b = input_map_(q);
  if (b.rows() != n_ || b.cols() != n_ - 1) throw ModelInvariantError("input map has wrong shape");
  return b;
}

namespace {

void check_state(const MechanicalSystem& sys, const Vector& q, const Vector& qdot) {
  if (q.size() != sys.dof() || qdot.size() != sys.dof()) {
    throw PreconditionError("state dimension does not match the system");
  }
  if (!q.allFinite() || !qdot.allFinite()) throw PreconditionError("non-finite state");
}

}  // namespace

Vector eval_accel(const MechanicalSystem& sys, const PhaseState& s, const Vector& u) {
  check_state(sys, s.q, s.qdot);
  if (u.size() != sys.num_inputs()) throw PreconditionError("input dimension does not match the system");
  if (!u.allFinite()) throw PreconditionError("non-finite input");
  const Matrix m = sys.mass(s.q);
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success || !m.isApprox(m.transpose())) {
    throw ModelInvariantError("mass matrix is not symmetric positive definite");
  }
  const Vector rhs = sys.input_map(s.q) * u - sys.coriolis(s.q, s.qdot) * s.qdot -
                     sys.gravity(s.q);
  return llt.solve(rhs);
}

InverseInput inverse_input(const MechanicalSystem& sys, const Vector& q,
                           const Vector& qdot, const Vector& qddot) {
  check_state(sys, q, qdot);
  if (qddot.size() != sys.dof() || !qddot.allFinite()) throw PreconditionError("bad acceleration");
  const Matrix b = sys.input_map(q);
  Eigen::ColPivHouseholderQR<Matrix> qr(b);
  if (qr.rank() != sys.num_inputs()) throw ModelInvariantError("input map is rank deficient");
  const Vector rhs = sys.mass(q) * qddot + sys.coriolis(q, qdot) * qdot + sys.gravity(q);
  InverseInput out;
  out.u = qr.solve(rhs);
  out.residual = std::abs(left_annihilator(sys, q).dot(rhs));
  return out;
}

RowVector left_annihilator(const MechanicalSystem& sys, const Vector& q) {
  if (sys.has_closed_form_annihilator()) return sys.closed_form_annihilator()(q);
  const Matrix b = sys.input_map(q);
  Eigen::ColPivHouseholderQR<Matrix> rank_check(b);
  if (rank_check.rank() != sys.num_inputs()) throw ModelInvariantError("input map is rank deficient");
  Eigen::HouseholderQR<Matrix> qr(b);
  const Matrix full_q = qr.householderQ();
  RowVector out = full_q.col(sys.dof() - 1).transpose();
  for (int i = 0; i < out.size(); ++i) {
    if (std::abs(out(i)) > 1e-12) {
      if (out(i) < 0.0) out = -out;
      break;
    }
  }
  return out;
}

RowVector align_annihilator(const RowVector& candidate, const RowVector& previous) {
  return candidate.dot(previous) < 0.0 ? RowVector(-candidate) : candidate;
}

double gravity_distance(const MechanicalSystem& sys, const Vector& q) {
  const Matrix b = sys.input_map(q);
  const Vector g = sys.gravity(q);
  const Matrix projector = b * (b.transpose() * b).ldlt().solve(b.transpose());
  return (g - projector * g).norm();
}

MechanicalSystem pvtol_model() {
  return MechanicalSystem(
      "pvtol", 3, [](const Vector&) { return Matrix(Matrix::Identity(3, 3)); },
      [](const Vector&, const Vector&) { return Matrix(Matrix::Zero(3, 3)); },
      [](const Vector&) { return Vector(Eigen::Vector3d(0.0, 1.0, 0.0)); },
      [](const Vector& q) {
        Matrix b(3, 2);
        b << -std::sin(q(2)), 0.0, std::cos(q(2)), 0.0, 0.0, 1.0;
        return b;
      },
      [](const Vector& q) {
        RowVector a(3);
        a << std::cos(q(2)), std::sin(q(2)), 0.0;
        return a;
      });
}

ReferencePoint tic_toc_reference(double t) {
  const double s = std::sin(t);
  const double c = std::cos(t);
  const double d = 1.0 + 4.0 * s * s;  // == 3 - 2 cos 2t
  ReferencePoint p;
  p.q = Eigen::Vector3d(s, -0.5 * s * s, 0.5 * std::numbers::pi - std::atan(2.0 * s));
  p.qdot = Eigen::Vector3d(c, -s * c, -2.0 * c / d);
  p.qddot = Eigen::Vector3d(-s, -std::cos(2.0 * t), 2.0 * s / d + 16.0 * s * c * c / (d * d));
  p.u = Eigen::Vector2d(s * std::sqrt(4.0 * s * s + 1.0),
                        (12.0 * s + 2.0 * std::sin(3.0 * t)) / (d * d));
  return p;
}

}  // namespace vhcplan
