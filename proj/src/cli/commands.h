#pragma once

#include <exception>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "cli/config.h"

namespace vhcplan::cli {

/// A checked condition does not hold (crossing conditions, inconclusive
/// certificate, empty parameter search); maps to exit code 2.
class ConditionFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum ExitCode : int {
  kExitOk = 0,
  kExitCondition = 2,
  kExitNumerical = 3,
  kExitUsage = 64,
};

/// Exit code and error kind for an exception escaping a command.
int exit_code_for(const std::exception& e);
std::string error_kind(const std::exception& e);

int cmd_plan(const RunConfig& config, std::ostream& log);
int cmd_certify(const RunConfig& config, std::ostream& log);
int cmd_stabilize(const RunConfig& config, std::ostream& log);
int cmd_simulate(const RunConfig& config, std::ostream& log);
int cmd_sweep(const RunConfig& config, std::ostream& log);

/// Creates the output directory, writes config.resolved.json and
/// metadata.json, runs the named command and turns escaping exceptions into
/// error.json plus the mapped exit code.
int run_command(const std::string& name, const RunConfig& config, std::ostream& log);

}  // namespace vhcplan::cli
