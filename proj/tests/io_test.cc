#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "vhcplan/errors.h"
#include "vhcplan/io.h"
#include "vhcplan/mech.h"
#include "vhcplan/sim.h"
#include "vhcplan/trajectory.h"
#include "vhcplan/transverse.h"

namespace vhcplan {
namespace {

constexpr double kPi = std::numbers::pi;

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = text.find("\r\n", pos);
    EXPECT_NE(end, std::string::npos) << "row without CRLF";
    if (end == std::string::npos) break;
    out.push_back(text.substr(pos, end - pos));
    pos = end + 2;
  }
  return out;
}

std::size_t field_count(const std::string& row) { return std::count(row.begin(), row.end(), ',') + 1; }

TEST(FormatDouble, RoundTrips) {
  for (double v : {0.0, -0.0, 1.0, kPi, -1e-300, 6.02214076e23, 0.1, 1.0 / 3.0}) {
    const std::string s = io::format_double(v);
    EXPECT_EQ(std::strtod(s.c_str(), nullptr), v) << s;
  }
}

TEST(TrajectoryCsv, HeaderAndRoundTrip) {
  const PeriodicTrajectory traj = tic_toc_trajectory(512);
  std::stringstream ss;
  io::write_trajectory_csv(ss, traj);
  const std::vector<std::string> rows = lines(ss.str());
  ASSERT_EQ(rows.size(), 513u);
  EXPECT_EQ(rows[0], "t,theta,thetadot,x,z,psi,xdot,zdot,psidot,u1,u2");
  for (std::size_t i = 1; i < rows.size(); ++i) ASSERT_EQ(field_count(rows[i]), 11u);

  std::stringstream in(ss.str());
  const PeriodicTrajectory back = io::read_trajectory_csv(in);
  EXPECT_NEAR(back.period(), 2 * kPi, 1e-12);
  ASSERT_EQ(back.samples().size(), traj.samples().size());
  for (std::size_t i = 0; i < traj.samples().size(); ++i) {
    EXPECT_EQ(back.samples()[i].q, traj.samples()[i].q);
    EXPECT_EQ(back.samples()[i].qdot, traj.samples()[i].qdot);
    EXPECT_EQ(back.samples()[i].u, traj.samples()[i].u);
  }
}

TEST(TrajectoryCsv, ReconstructedAccelerationIsSecondOrder) {
  auto error = [](int n) {
    const PeriodicTrajectory traj = tic_toc_trajectory(n);
    std::stringstream ss;
    io::write_trajectory_csv(ss, traj);
    const PeriodicTrajectory back = io::read_trajectory_csv(ss);
    double worst = 0.0;
    for (std::size_t i = 0; i < traj.samples().size(); ++i) {
      worst = std::max(worst, (back.samples()[i].qddot - traj.samples()[i].qddot).lpNorm<Eigen::Infinity>());
    }
    return worst;
  };
  const double e512 = error(512), e1024 = error(1024);
  const double h = 2 * kPi / 512;
  EXPECT_LT(e512, 20 * h * h);
  EXPECT_NEAR(e512 / e1024, 4.0, 0.3);
}

TEST(TrajectoryCsv, RejectsMalformedInput) {
  std::stringstream bad_header("t,theta\r\n0,1\r\n");
  EXPECT_THROW(io::read_trajectory_csv(bad_header), PreconditionError);
  std::stringstream uneven(
      "t,theta,thetadot,x,z,psi,xdot,zdot,psidot,u1,u2\r\n"
      "0,0,1,0,0,1,1,0,-2,0,0\r\n"
      "0.1,0,1,0,0,1,1,0,-2,0,0\r\n"
      "0.3,0,1,0,0,1,1,0,-2,0,0\r\n"
      "0.4,0,1,0,0,1,1,0,-2,0,0\r\n");
  EXPECT_THROW(io::read_trajectory_csv(uneven), PreconditionError);
}

TEST(SimulationCsv, RhoFieldsEmptyOutsideTube) {
  const TransverseChart chart = tic_toc_chart({0.5, 1e-13, 50});
  SimulationOptions o;
  o.horizon = 0.05;
  const SimulationResult r = run_closed_loop(chart, nullptr, {Eigen::Vector3d(0.1, -0.5, 0), Vector::Zero(3)}, o);
  ASSERT_FALSE(r.samples.front().rho.has_value());
  std::stringstream ss;
  io::write_simulation_csv(ss, chart, r);
  const std::vector<std::string> rows = lines(ss.str());
  ASSERT_EQ(rows.size(), r.samples.size() + 1);
  EXPECT_EQ(rows[0], "t,theta,thetadot,x,z,psi,xdot,zdot,psidot,u1,u2,tau,rho1,rho2,rho3,rho4,rho5");
  EXPECT_EQ(field_count(rows[1]), 17u);
  EXPECT_EQ(rows[1].substr(rows[1].size() - 5), ",,,,,");
}

TEST(LtvCsv, Headers) {
  std::vector<Matrix> a(4, Matrix::Identity(5, 5)), b(4, Matrix::Ones(5, 2));
  const LtvModel model(a, b);
  std::stringstream ss;
  io::write_ltv_csv(ss, model);
  const std::vector<std::string> rows = lines(ss.str());
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(field_count(rows[0]), 1u + 25u + 10u);
  EXPECT_EQ(rows[0].substr(0, 13), "tau,a11,a12,a");
  EXPECT_EQ(rows[0].substr(rows[0].size() - 7), "b51,b52");
  EXPECT_EQ(rows[1].substr(0, 3), "-3.");

  const GainSchedule gains(std::vector<Matrix>(4, Matrix::Zero(2, 5)), std::vector<Matrix>(4, Matrix::Zero(5, 5)));
  std::stringstream gs;
  io::write_gains_csv(gs, gains);
  const std::vector<std::string> grows = lines(gs.str());
  EXPECT_EQ(grows[0], "tau,k11,k12,k13,k14,k15,k21,k22,k23,k24,k25");
}

TEST(Json, StableKeys) {
  const SingularityReport r = check_singular_crossing(ReducedModel::from_vhc(pvtol_model(), tic_toc_vhc()));
  const io::Json j = io::to_json(r);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  ASSERT_GE(keys.size(), 7u);
  EXPECT_EQ(std::vector<std::string>(keys.begin(), keys.begin() + 5),
            (std::vector<std::string>{"theta_s", "alpha_slope", "beta_s", "gamma_s", "v_s"}));
  EXPECT_TRUE(j.contains("flags"));
  EXPECT_TRUE(j.contains("overall"));
  EXPECT_TRUE(j["overall"].get<bool>());
  EXPECT_EQ(j.dump(), io::to_json(r).dump());

  MonodromyResult m;
  m.f = Matrix::Identity(2, 2);
  m.eigenvalues = {{0.5, 0.25}, {0.5, -0.25}};
  m.spectral_radius = std::abs(m.eigenvalues[0]);
  const io::Json mj = io::to_json(m);
  EXPECT_EQ(mj.dump().find("imag") != std::string::npos, true);
}

}  // namespace
}  // namespace vhcplan
