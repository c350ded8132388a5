#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "vhcplan/errors.h"
#include "vhcplan/feasibility.h"
#include "vhcplan/mech.h"
#include "vhcplan/trajectory.h"

namespace vhcplan {
namespace {

constexpr double kPi = std::numbers::pi;

// PVTOL whose gravity points along the thrust axis: G(q) = B(q) (1, 0)^T.
MechanicalSystem thrust_aligned_gravity() {
  const MechanicalSystem p = pvtol_model();
  return MechanicalSystem(
      "thrust_gravity", 3, [p](const Vector& q) { return p.mass(q); },
      [p](const Vector& q, const Vector& qd) { return p.coriolis(q, qd); },
      [p](const Vector& q) { return Vector(p.input_map(q).col(0)); },
      [p](const Vector& q) { return p.input_map(q); }, [p](const Vector& q) { return p.closed_form_annihilator()(q); });
}

TEST(Certificate, TicTocVerdictPositive) {
  const NoVhcCertificate cert = certify_no_regular_vhc(pvtol_model(), tic_toc_trajectory());
  EXPECT_EQ(cert.verdict, CertificateVerdict::no_regular_vhc);
  ASSERT_EQ(cert.records.size(), 2u);
  EXPECT_NEAR(cert.records[0].time.t, 0.0, 1e-8);
  EXPECT_NEAR(cert.records[1].time.t, kPi, 1e-8);
  for (const CertificateRecord& r : cert.records) {
    EXPECT_TRUE(r.hypotheses_hold);
    EXPECT_LT(r.time.annihilator_residual, 1e-12);
    EXPECT_NEAR(r.time.velocity_norm, std::sqrt(5.0), 1e-12);
    EXPECT_NEAR(r.time.gravity_distance, 1.0, 1e-12);
    EXPECT_LT((r.time.q - Eigen::Vector3d(0, 0, kPi / 2)).norm(), 1e-8);
  }
  EXPECT_LT((cert.records[0].time.qdot - Eigen::Vector3d(1, 0, -2)).norm(), 1e-8);
  EXPECT_LT((cert.records[1].time.qdot - Eigen::Vector3d(-1, 0, 2)).norm(), 1e-8);
  EXPECT_STREQ(to_string(cert.verdict), "no_regular_vhc");
}

TEST(Certificate, GravityInInputRangeIsInconclusive) {
  const NoVhcCertificate cert = certify_no_regular_vhc(thrust_aligned_gravity(), tic_toc_trajectory());
  EXPECT_EQ(cert.verdict, CertificateVerdict::inconclusive);
  ASSERT_FALSE(cert.records.empty());
  for (const CertificateRecord& r : cert.records) {
    EXPECT_FALSE(r.hypotheses_hold);
    EXPECT_LT(r.time.gravity_distance, 1e-12);
  }
  EXPECT_FALSE(cert.explanation.empty());
}

TEST(Certificate, NoSingularTimeIsInconclusive) {
  auto eval = [](double t) {
    TrajectorySample s;
    s.t = t;
    s.q = Eigen::Vector3d(std::sin(t), 0, 0);
    s.qdot = Eigen::Vector3d(std::cos(t), 0, 0);
    s.qddot = Eigen::Vector3d(-std::sin(t), 0, 0);
    s.u = Eigen::Vector2d(1, 0);
    return s;
  };
  std::vector<TrajectorySample> samples;
  for (int k = 0; k < 512; ++k) samples.push_back(eval(2 * kPi * k / 512));
  const NoVhcCertificate cert = certify_no_regular_vhc(pvtol_model(), PeriodicTrajectory(2 * kPi, samples, eval));
  EXPECT_EQ(cert.verdict, CertificateVerdict::inconclusive);
  EXPECT_TRUE(cert.records.empty());
}

TEST(Certificate, RefinementKeepsSingularTimes) {
  const auto coarse = certify_no_regular_vhc(pvtol_model(), tic_toc_trajectory(1000));
  const auto fine = certify_no_regular_vhc(pvtol_model(), tic_toc_trajectory(2000));
  ASSERT_EQ(coarse.records.size(), fine.records.size());
  for (std::size_t i = 0; i < coarse.records.size(); ++i) {
    EXPECT_NEAR(coarse.records[i].time.t, fine.records[i].time.t, 1e-8);
  }
}

TEST(CandidateH, VanishesOnOrbit) {
  for (double t : {0.0, 1.0, 2.0, 4.0, -0.6}) {
    const ReferencePoint r = tic_toc_reference(t);
    const CandidateConstraint c = candidate_h(r.q);
    EXPECT_LT(c.h.norm(), 1e-12);
    EXPECT_LT((c.dh * r.qdot).norm(), 1e-12);
  }
  const CandidateConstraint c0 = candidate_h(Eigen::Vector3d(0, 0, kPi / 2));
  EXPECT_LT((c0.dh * Eigen::Vector3d(1, 0, -2)).norm(), 1e-15);
}

TEST(CandidateH, JacobianAndCurvatureMatchFiniteDifferences) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> d(-2, 2);
  for (int i = 0; i < 50; ++i) {
    const Vector q = Eigen::Vector3d(d(rng), d(rng), d(rng));
    const CandidateConstraint c = candidate_h(q);
    Matrix expected(2, 3);
    expected << q(0), 1, 0, 2 / (1 + 4 * q(0) * q(0)), 0, 1;
    EXPECT_LT((c.dh - expected).norm(), 1e-15);
    Eigen::FullPivLU<Matrix> lu(c.dh);
    EXPECT_EQ(lu.rank(), 2);
    for (int j = 0; j < 3; ++j) {
      const double h = 1e-6;
      Vector e = Vector::Zero(3);
      e(j) = h;
      const Vector col = (candidate_h(q + e).h - candidate_h(q - e).h) / (2 * h);
      EXPECT_LT((col - c.dh.col(j)).norm(), 1e-8);
    }
    // Along q(s) = q + s v + s^2 w: d^2 h/ds^2 at 0 = dh (2 w) + curvature(q, v).
    const Vector v = Eigen::Vector3d(d(rng), d(rng), d(rng));
    const Vector w = Eigen::Vector3d(d(rng), d(rng), d(rng));
    const double s = 1e-4;
    auto path = [&](double x) { return candidate_h(Vector(q + x * v + x * x * w)).h; };
    const Vector second = (path(s) - 2 * path(0) + path(-s)) / (s * s);
    EXPECT_LT((second - (c.dh * (2 * w) + candidate_h_curvature(q, v))).norm(), 1e-5 * (1 + v.squaredNorm()));
  }
}

TEST(Accessibility, ClosedFormExamples) {
  const MechanicalSystem sys = pvtol_model();
  const PhaseState s0{Eigen::Vector3d(0, 0, kPi / 2), Eigen::Vector3d(1, 0, -2)};
  EXPECT_NEAR(accessibility_det(sys, s0, AccessibilityMethod::closed_form).determinant, -12.0, 1e-9);
  const PhaseState still{Eigen::Vector3d(0.3, 1, 0.7), Eigen::Vector3d(2, -1, 0)};
  EXPECT_EQ(accessibility_det(sys, still, AccessibilityMethod::closed_form).determinant, 0.0);
  EXPECT_NEAR(accessibility_det(sys, still, AccessibilityMethod::numeric_bracket).determinant, 0.0, 1e-6);
}

TEST(Accessibility, MethodsAgree) {
  const MechanicalSystem sys = pvtol_model();
  const PhaseState s0{Eigen::Vector3d(0, 0, kPi / 2), Eigen::Vector3d(1, 0, -2)};
  const double numeric = accessibility_det(sys, s0, AccessibilityMethod::numeric_bracket).determinant;
  EXPECT_NEAR(numeric, -12.0, 12.0 * 1e-4);
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> d(-1.5, 1.5);
  int compared = 0;
  for (int i = 0; i < 40; ++i) {
    const PhaseState s{Eigen::Vector3d(d(rng), d(rng), d(rng)), Eigen::Vector3d(d(rng), d(rng), d(rng))};
    const AccessibilityRecord closed = accessibility_det(sys, s, AccessibilityMethod::closed_form);
    const AccessibilityRecord num = accessibility_det(sys, s, AccessibilityMethod::numeric_bracket);
    EXPECT_EQ(num.method, AccessibilityMethod::numeric_bracket);
    if (std::abs(closed.determinant) > 1e-6) {
      ++compared;
      EXPECT_NEAR(num.determinant, closed.determinant, 1e-4 * std::abs(closed.determinant));
    }
  }
  EXPECT_GT(compared, 30);
}

TEST(Accessibility, ClosedFormIsPvtolOnly) {
  const PhaseState s0{Eigen::Vector3d(0, 0, kPi / 2), Eigen::Vector3d(1, 0, -2)};
  EXPECT_THROW(accessibility_det(thrust_aligned_gravity(), s0, AccessibilityMethod::closed_form), PreconditionError);
  const PhaseState bad{Eigen::Vector3d(0, NAN, 0), Eigen::Vector3d(1, 0, -2)};
  EXPECT_THROW(accessibility_det(pvtol_model(), bad, AccessibilityMethod::numeric_bracket), PreconditionError);
}

TEST(Accessibility, ZerosAlongOrbitOnlyAtTurningPoints) {
  const PeriodicTrajectory traj = tic_toc_trajectory();
  for (AccessibilityMethod m : {AccessibilityMethod::closed_form, AccessibilityMethod::numeric_bracket}) {
    const std::vector<double> zeros = accessibility_zeros(pvtol_model(), traj, m);
    ASSERT_EQ(zeros.size(), 2u);
    EXPECT_NEAR(zeros[0], kPi / 2, 1e-6);
    EXPECT_NEAR(zeros[1], 3 * kPi / 2, 1e-6);
  }
  EXPECT_NE(accessibility_det(pvtol_model(), {traj.at(0).q, traj.at(0).qdot}, AccessibilityMethod::closed_form)
                .determinant,
            0.0);
}

}  // namespace
}  // namespace vhcplan
