#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"
#include "vhcplan/feasibility.h"
#include "vhcplan/sim.h"
#include "vhcplan/trajectory.h"
#include "vhcplan/transverse.h"
#include "vhcplan/vhc.h"

namespace vhcplan::io {

using Json = nlohmann::ordered_json;

/// Shortest round-trip-safe form with 17 significant digits.
std::string format_double(double v);

/// Header t,theta,thetadot,<q>,<qdot>,u1..um; coordinates are named
/// x,z,psi for three degrees of freedom and q1..qn otherwise. Rows end with
/// CRLF.
void write_trajectory_csv(std::ostream& os, const PeriodicTrajectory& traj);

/// Reads a file written by write_trajectory_csv. Rows must be uniformly
/// spaced over one period; the period is inferred as rows x spacing.
PeriodicTrajectory read_trajectory_csv(std::istream& is);

/// Trajectory columns (theta, thetadot hold the chart phase X and X') plus
/// tau,rho1..rhoK. rho fields are empty outside the chart tube.
void write_simulation_csv(std::ostream& os, const TransverseChart& chart, const SimulationResult& result);

/// tau,a11..aDD,b11..bDM, matrices flattened row-major.
void write_ltv_csv(std::ostream& os, const LtvModel& model);

/// tau,k11..kMD.
void write_gains_csv(std::ostream& os, const GainSchedule& gains);

Json to_json(const SingularityReport& report);
Json to_json(const FamilyParameters& k);
Json to_json(const NoVhcCertificate& cert);
Json to_json(const AccessibilityRecord& rec);
Json to_json(const GramianResult& g);
Json to_json(const MonodromyResult& m);
Json to_json(const Vector& v);
Json to_json(const Matrix& m);

}  // namespace vhcplan::io
