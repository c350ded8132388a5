#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "vhcplan/errors.h"
#include "vhcplan/mech.h"

namespace vhcplan {
namespace {

constexpr double kPi = std::numbers::pi;

Vector v3(double a, double b, double c) { return Eigen::Vector3d(a, b, c); }
Vector v2(double a, double b) { return Eigen::Vector2d(a, b); }

// PVTOL without the closed-form annihilator, forcing the generic route.
MechanicalSystem generic_pvtol() {
  const MechanicalSystem p = pvtol_model();
  return MechanicalSystem(
      "pvtol_generic", 3, [p](const Vector& q) { return p.mass(q); },
      [p](const Vector& q, const Vector& qd) { return p.coriolis(q, qd); },
      [p](const Vector& q) { return p.gravity(q); }, [p](const Vector& q) { return p.input_map(q); });
}

TEST(EvalAccel, PvtolExamples) {
  const MechanicalSystem sys = pvtol_model();
  const Vector a = eval_accel(sys, {v3(0, 0, kPi / 2), Vector::Zero(3)}, v2(2, 3));
  EXPECT_NEAR(a(0), -2.0, 1e-15);
  EXPECT_NEAR(a(1), -1.0, 1e-15);
  EXPECT_NEAR(a(2), 3.0, 1e-15);
  const Vector fall = eval_accel(sys, {v3(0.4, -2, 1.3), v3(1, 2, 3)}, v2(0, 0));
  EXPECT_TRUE(fall.isApprox(v3(0, -1, 0)));
  const Vector hover = eval_accel(sys, {Vector::Zero(3), Vector::Zero(3)}, v2(1, 0));
  EXPECT_NEAR(hover.norm(), 0.0, 1e-15);
}

TEST(EvalAccel, ResidualBound) {
  const MechanicalSystem sys = pvtol_model();
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> d(-3, 3);
  for (int i = 0; i < 200; ++i) {
    const PhaseState s{v3(d(rng), d(rng), d(rng)), v3(d(rng), d(rng), d(rng))};
    const Vector u = v2(d(rng), d(rng));
    const Vector a = eval_accel(sys, s, u);
    const Vector r = sys.mass(s.q) * a + sys.coriolis(s.q, s.qdot) * s.qdot + sys.gravity(s.q) - sys.input_map(s.q) * u;
    EXPECT_LE(r.norm(), 1e-12 * (1 + u.norm()));
  }
}

TEST(EvalAccel, RejectsBadInput) {
  const MechanicalSystem sys = pvtol_model();
  EXPECT_THROW(eval_accel(sys, {v3(0, 0, NAN), Vector::Zero(3)}, v2(0, 0)), PreconditionError);
  EXPECT_THROW(eval_accel(sys, {Vector::Zero(3), Vector::Zero(3)}, v2(INFINITY, 0)), PreconditionError);
  EXPECT_THROW(eval_accel(sys, {Vector::Zero(3), Vector::Zero(3)}, Vector::Zero(3)), PreconditionError);
  const MechanicalSystem bad(
      "indefinite", 3, [](const Vector&) { return Matrix(Eigen::Vector3d(1, -1, 1).asDiagonal()); },
      [](const Vector&, const Vector&) { return Matrix::Zero(3, 3); }, [](const Vector&) { return Vector::Zero(3); },
      [](const Vector& q) { return pvtol_model().input_map(q); });
  EXPECT_THROW(eval_accel(bad, {Vector::Zero(3), Vector::Zero(3)}, v2(0, 0)), ModelInvariantError);
}

TEST(InverseInput, Examples) {
  const MechanicalSystem sys = pvtol_model();
  const ReferencePoint r = tic_toc_reference(kPi / 4);
  const InverseInput inv = inverse_input(sys, r.q, r.qdot, r.qddot);
  EXPECT_LT((inv.u - r.u).norm(), 1e-12);
  EXPECT_LT(inv.residual, 1e-10);
  const InverseInput hover = inverse_input(sys, Vector::Zero(3), Vector::Zero(3), Vector::Zero(3));
  EXPECT_NEAR(hover.u(0), 1.0, 1e-15);
  EXPECT_NEAR(hover.u(1), 0.0, 1e-15);
  EXPECT_NEAR(hover.residual, 0.0, 1e-15);
  EXPECT_NEAR(inverse_input(sys, v3(0, 0, kPi / 2), Vector::Zero(3), Vector::Zero(3)).residual, 1.0, 1e-15);
}

TEST(InverseInput, RoundTripWithEvalAccel) {
  const MechanicalSystem sys = pvtol_model();
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> d(-2, 2);
  for (int i = 0; i < 200; ++i) {
    const PhaseState s{v3(d(rng), d(rng), d(rng)), v3(d(rng), d(rng), d(rng))};
    const Vector u = v2(d(rng), d(rng));
    const InverseInput inv = inverse_input(sys, s.q, s.qdot, eval_accel(sys, s, u));
    EXPECT_LT((inv.u - u).lpNorm<Eigen::Infinity>(), 1e-10);
    EXPECT_LT(inv.residual, 1e-10);
  }
}

TEST(InverseInput, RankDeficientInputMapRejected) {
  const MechanicalSystem sys(
      "degenerate", 3, [](const Vector&) { return Matrix::Identity(3, 3); },
      [](const Vector&, const Vector&) { return Matrix::Zero(3, 3); }, [](const Vector&) { return Vector::Zero(3); },
      [](const Vector&) {
        Matrix b = Matrix::Zero(3, 2);
        b(0, 0) = 1.0;
        b(0, 1) = 2.0;
        return b;
      });
  EXPECT_THROW(inverse_input(sys, Vector::Zero(3), Vector::Zero(3), Vector::Zero(3)), ModelInvariantError);
}

TEST(LeftAnnihilator, ClosedFormAndGenericAgree) {
  const MechanicalSystem closed = pvtol_model();
  const MechanicalSystem generic = generic_pvtol();
  for (double psi : {-2.0, 0.0, 0.3, kPi / 2, 2.5}) {
    const Vector q = v3(0.2, -0.1, psi);
    const RowVector b = left_annihilator(closed, q);
    EXPECT_NEAR(b(0), std::cos(psi), 1e-15);
    EXPECT_NEAR(b(1), std::sin(psi), 1e-15);
    EXPECT_EQ(b(2), 0.0);
    const RowVector g = left_annihilator(generic, q);
    EXPECT_LT((g * generic.input_map(q)).lpNorm<Eigen::Infinity>(), 1e-12);
    EXPECT_NEAR(g.norm(), 1.0, 1e-14);
    EXPECT_NEAR(std::abs(g.dot(b)), 1.0, 1e-12);
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      if (std::abs(g(i)) > 1e-12) {
        EXPECT_GT(g(i), 0.0);
        break;
      }
    }
  }
  const RowVector top = left_annihilator(closed, v3(0, 0, kPi / 2));
  EXPECT_NEAR(top(0), 0.0, 1e-15);
  EXPECT_NEAR(top(1), 1.0, 1e-15);
}

TEST(LeftAnnihilator, StableUnderSmallPerturbation) {
  const MechanicalSystem generic = generic_pvtol();
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(-3, 3), e(-1e-8, 1e-8);
  for (int i = 0; i < 100; ++i) {
    const Vector q = v3(d(rng), d(rng), d(rng));
    const Vector dq = v3(e(rng), e(rng), e(rng));
    const RowVector b0 = left_annihilator(generic, q);
    const RowVector b1 = align_annihilator(left_annihilator(generic, q + dq), b0);
    EXPECT_LT((b1 - b0).norm(), 1e-7);
  }
}

TEST(AlignAnnihilator, FlipsOpposedCandidate) {
  const RowVector prev = Eigen::RowVector3d(1, 0, 0);
  EXPECT_TRUE(align_annihilator(Eigen::RowVector3d(-0.9, 0.1, 0), prev).isApprox(Eigen::RowVector3d(0.9, -0.1, 0)));
  EXPECT_TRUE(align_annihilator(Eigen::RowVector3d(0.9, 0.1, 0), prev).isApprox(Eigen::RowVector3d(0.9, 0.1, 0)));
}

TEST(GravityDistance, InvariantUnderBasisChange) {
  const MechanicalSystem p = pvtol_model();
  Matrix t(2, 2);
  t << 2.0, -1.0, 0.5, 3.0;
  const MechanicalSystem mixed(
      "mixed", 3, [p](const Vector& q) { return p.mass(q); },
      [p](const Vector& q, const Vector& qd) { return p.coriolis(q, qd); },
      [p](const Vector& q) { return p.gravity(q); }, [p, t](const Vector& q) { return Matrix(p.input_map(q) * t); });
  for (double psi : {0.0, 0.4, kPi / 2, 2.0}) {
    const Vector q = v3(0, 0, psi);
    EXPECT_NEAR(gravity_distance(mixed, q), gravity_distance(p, q), 1e-14);
    EXPECT_NEAR(gravity_distance(p, q), std::abs(std::sin(psi)), 1e-14);
  }
}

TEST(PvtolModel, Structure) {
  const MechanicalSystem sys = pvtol_model();
  EXPECT_EQ(sys.dof(), 3);
  EXPECT_EQ(sys.num_inputs(), 2);
  const Vector q = v3(0, 0, kPi / 2);
  Matrix expected(3, 2);
  expected << -1, 0, 0, 0, 0, 1;
  EXPECT_LT((sys.input_map(q) - expected).norm(), 1e-15);
  EXPECT_TRUE(sys.mass(v3(1, 2, 3)).isIdentity());
  EXPECT_TRUE(sys.gravity(v3(5, -1, 2)).isApprox(v3(0, 1, 0)));
  EXPECT_TRUE(sys.coriolis(q, v3(1, 1, 1)).isZero());
}

TEST(TicTocReference, Examples) {
  const ReferencePoint r0 = tic_toc_reference(0.0);
  EXPECT_LT((r0.q - v3(0, 0, kPi / 2)).norm(), 1e-15);
  EXPECT_LT((r0.qdot - v3(1, 0, -2)).norm(), 1e-15);
  EXPECT_LT(r0.u.norm(), 1e-15);
  const ReferencePoint r1 = tic_toc_reference(kPi / 2);
  EXPECT_LT((r1.q - v3(1, -0.5, kPi / 2 - std::atan(2.0))).norm(), 1e-15);
  EXPECT_LT(r1.qdot.norm(), 1e-15);
}

TEST(TicTocReference, DerivativesMatchFiniteDifferences) {
  const double h = 1e-5;
  for (double t = -3.0; t < 3.5; t += 0.37) {
    const ReferencePoint r = tic_toc_reference(t);
    const ReferencePoint p = tic_toc_reference(t + h), m = tic_toc_reference(t - h);
    EXPECT_LT(((p.q - m.q) / (2 * h) - r.qdot).lpNorm<Eigen::Infinity>(), 1e-9);
    EXPECT_LT(((p.qdot - m.qdot) / (2 * h) - r.qddot).lpNorm<Eigen::Infinity>(), 1e-8);
  }
}

TEST(TicTocReference, SubstitutionIdentity) {
  const MechanicalSystem sys = pvtol_model();
  for (int k = 0; k < 1000; ++k) {
    const double t = 2.0 * kPi * k / 999.0;
    const ReferencePoint r = tic_toc_reference(t);
    const Vector rhs = sys.input_map(r.q) * r.u - sys.gravity(r.q);
    ASSERT_LT((r.qddot - rhs).lpNorm<Eigen::Infinity>(), 1e-9) << "t=" << t;
  }
}

}  // namespace
}  // namespace vhcplan
