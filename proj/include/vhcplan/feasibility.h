#pragma once

#include <string>
#include <vector>

#include "vhcplan/mech.h"
#include "vhcplan/trajectory.h"
#include "vhcplan/types.h"
#include "vhcplan/vhc.h"

namespace vhcplan {

enum class CertificateVerdict { no_regular_vhc, inconclusive };

const char* to_string(CertificateVerdict verdict);

struct CertificateRecord {
  SingularTime time;
  /// |B_perp M q'| < 1e-10, |q'| > 1e-8 and dist(G, Im B) > 1e-8.
  bool hypotheses_hold{false};
};

/// Numerical evidence that no regular virtual holonomic constraint can hold a
/// given periodic motion: a time where the motion crosses the kernel of
/// B_perp M with nonzero velocity while gravity cannot be balanced by the
/// inputs.
struct NoVhcCertificate {
  std::vector<CertificateRecord> records;
  CertificateVerdict verdict{CertificateVerdict::inconclusive};
  std::string explanation;
};

struct CertificateTolerances {
  double annihilator_residual{1e-10};
  double velocity_norm{1e-8};
  double gravity_distance{1e-8};
};

/// The verdict is positive when at least one singular time satisfies all
/// three hypotheses. Finding none proves nothing, and the verdict is then
/// inconclusive.
NoVhcCertificate certify_no_regular_vhc(const MechanicalSystem& sys, const PeriodicTrajectory& traj,
                                        const SingularScanOptions& scan = {},
                                        const CertificateTolerances& tol = {});

/// Candidate constraint for the tic-toc orbit,
/// h(q) = (z + x^2 / 2, psi - pi/2 + atan(2 x)).
struct CandidateConstraint {
  Vector h;   // 2
  Matrix dh;  // 2 x 3
};

CandidateConstraint candidate_h(const Vector& q);

/// d/dt (dh(q)) q' for the candidate constraint, so that
/// d^2/dt^2 h = dh q'' + candidate_h_curvature(q, q').
Vector candidate_h_curvature(const Vector& q, const Vector& qdot);

enum class AccessibilityMethod { closed_form, numeric_bracket };

const char* to_string(AccessibilityMethod method);

struct AccessibilityRecord {
  PhaseState state;
  double determinant{0.0};
  AccessibilityMethod method{AccessibilityMethod::closed_form};
};

/// Determinant of [f, g_1, .., g_m, ad_f g_1, .., ad_f g_m, ad_f^2 g_1] with
/// f = (q', M^{-1}(-C q' - G)) and g_i = (0, M^{-1} B_i), m = n - 1.
///
/// The closed form is 2 psi' (-psi' x' sin psi + psi' z' cos psi + sin psi)
/// and applies to the PVTOL model only. The numeric method uses nested
/// central differences with step 1e-5 and the bracket [f, g] = Dg f - Df g.
AccessibilityRecord accessibility_det(const MechanicalSystem& sys, const PhaseState& state,
                                      AccessibilityMethod method);

/// Times in [start, start + period) where the accessibility determinant
/// changes sign along the trajectory, refined by bisection.
std::vector<double> accessibility_zeros(const MechanicalSystem& sys, const PeriodicTrajectory& traj,
                                        AccessibilityMethod method = AccessibilityMethod::closed_form);

}  // namespace vhcplan
