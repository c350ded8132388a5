#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vhcplan/io.h"

namespace vhcplan::cli {

using Json = io::Json;

/// Malformed configuration or command line; maps to exit code 64.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class VhcKind { tic_toc, family, auto_search, csv };

struct VhcConfig {
  VhcKind kind{VhcKind::tic_toc};
  double psi_s{1.5707963267948966};
  double k1{1.0};
  double k2{2.0};
  double k3{-1.0};
  double theta_max{0.5};
  std::string path;  // trajectory CSV for kind csv
};

/// Unset values default to (-1, 1) for tic-toc and +-theta_max/2 for the
/// family.
struct BoundaryConfig {
  std::optional<double> theta1;
  double theta1_dot{0.0};
  std::optional<double> theta2;
  double theta2_dot{0.0};
};

struct GridConfig {
  int trajectory_samples{2048};
  int transverse{512};
  int crossing_check{2048};
};

struct LqrConfig {
  std::vector<double> q_diag{1, 1, 1, 1, 1};
  std::vector<double> r_diag{1, 1};
};

struct SimConfig {
  double dt{0.01};
  double horizon{6.0 * 3.14159265358979323846};
  std::vector<double> q0{0.1, -0.5, 0.0};
  std::vector<double> qdot0{0.0, 0.0, 0.0};
  bool open_loop{false};
  bool zero_order_hold{false};
};

struct SweepConfig {
  std::vector<double> psi_s{0.7853981633974483, 1.5707963267948966, 2.356194490192345,
                            3.9269908169872414, 4.71238898038469,  5.497787143782138};
  int threads{0};  // 0: hardware concurrency
};

struct RunConfig {
  std::string model{"pvtol"};
  VhcConfig vhc;
  BoundaryConfig boundary;
  GridConfig grid;
  LqrConfig lqr;
  SimConfig sim;
  SweepConfig sweep;
  std::string output_dir{"vhcplan_out"};
};

const char* to_string(VhcKind kind);

/// Validates every key; unknown keys and ill-typed or out-of-range values
/// raise UsageError.
RunConfig parse_config(const Json& doc);

/// Fully resolved configuration with every default written out.
Json to_json(const RunConfig& config);

/// Reads a JSON file; UsageError when unreadable or malformed.
Json load_json_file(const std::string& path);

}  // namespace vhcplan::cli
