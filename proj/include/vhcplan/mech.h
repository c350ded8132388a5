#pragma once

#include <functional>
#include <optional>
#include <string>

#include "vhcplan/types.h"

namespace vhcplan {

/// An Euler-Lagrange system  M(q) q'' + C(q, q') q' + G(q) = B(q) u  with n
/// generalized coordinates and n - 1 inputs.
///
/// Evaluators are pure functions; a MechanicalSystem is an immutable value that
/// can be copied and shared between threads.
class MechanicalSystem {
 public:
  using MassFn = std::function<Matrix(const Vector& q)>;
  using CoriolisFn = std::function<Matrix(const Vector& q, const Vector& qdot)>;
  using GravityFn = std::function<Vector(const Vector& q)>;
  using InputMapFn = std::function<Matrix(const Vector& q)>;
  using AnnihilatorFn = std::function<RowVector(const Vector& q)>;

  /// `annihilator`, when given, is a closed-form unit-norm left annihilator of
  /// B(q) that overrides the generic orthogonal-decomposition route.
  MechanicalSystem(std::string name, int n, MassFn mass, CoriolisFn coriolis,
                   GravityFn gravity, InputMapFn input_map,
                   AnnihilatorFn annihilator = nullptr);

  const std::string& name() const { return name_; }
  int dof() const { return n_; }
  int num_inputs() const { return n_ - 1; }

  Matrix mass(const Vector& q) const;
  Matrix coriolis(const Vector& q, const Vector& qdot) const;
  Vector gravity(const Vector& q) const;
  Matrix input_map(const Vector& q) const;

  bool has_closed_form_annihilator() const { return static_cast<bool>(annihilator_); }
  const AnnihilatorFn& closed_form_annihilator() const { return annihilator_; }

 private:
  std::string name_;
  int n_;
  MassFn mass_;
  CoriolisFn coriolis_;
  GravityFn gravity_;
  InputMapFn input_map_;
  AnnihilatorFn annihilator_;
};

/// Solves M q'' = B u - C q' - G for q''. Throws PreconditionError on
/// non-finite or mis-sized input and ModelInvariantError when M(q) is not SPD.
Vector eval_accel(const MechanicalSystem& sys, const PhaseState& s, const Vector& u);

struct InverseInput {
  Vector u;
  /// |B_perp (M q'' + C q' + G)| with unit-norm B_perp; zero iff the motion is
  /// dynamically consistent.
  double residual{0.0};
};

/// Least-squares feedforward recovery: u minimizing |B u - (M q'' + C q' + G)|.
InverseInput inverse_input(const MechanicalSystem& sys, const Vector& q,
                           const Vector& qdot, const Vector& qddot);

/// Unit-norm row vector b with b B(q) = 0.
///
/// Uses the system's closed form when present. Otherwise takes the last column
/// of a full Householder QR of B(q) and makes its first nonzero entry
/// positive. Callers tracking B_perp along a path should pass each new value
/// through align_annihilator().
RowVector left_annihilator(const MechanicalSystem& sys, const Vector& q);

/// Flips `candidate` when it points against `previous`.
RowVector align_annihilator(const RowVector& candidate, const RowVector& previous);

/// Distance from G(q) to the column space of B(q), via the orthogonal
/// projector onto Im B.
double gravity_distance(const MechanicalSystem& sys, const Vector& q);

/// Planar VTOL aircraft without coupling: q = (x, z, psi), M = I, C = 0,
/// G = (0, 1, 0), B = [[-sin psi, 0], [cos psi, 0], [0, 1]].
MechanicalSystem pvtol_model();

/// Point on a reference trajectory with its feedforward input.
struct ReferencePoint {
  Vector q;
  Vector qdot;
  Vector qddot;
  Vector u;
};

/// The PVTOL tic-toc maneuver q*(t) = (sin t, -sin^2 t / 2, pi/2 - atan(2 sin t))
/// with hand-differentiated velocities, accelerations and inputs.
ReferencePoint tic_toc_reference(double t);

}  // namespace vhcplan
