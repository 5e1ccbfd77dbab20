#pragma once

#include <iosfwd>
#include <string>

#include "mfsmd/config.hpp"

namespace mfsmd {

enum ExitCode : int {
  kExitOk = 0,
  kExitVerifyFailed = 1,
  kExitConfigError = 2,
  kExitNumericalFailure = 3,
};

// Each command reads every key it needs before computing and throws on
// failure; run_command turns exceptions into exit codes.
int cmd_train(const Config& config, std::ostream& out);
int cmd_flow(const Config& config, std::ostream& out);
int cmd_converge(const Config& config, std::ostream& out);
int cmd_reproduce_paper(const Config& config, std::ostream& out);
int cmd_verify(const Config& config, std::ostream& out);

/// name in {train, flow, converge, reproduce-paper, verify}.
int run_command(const std::string& name, const Config& config, std::ostream& out,
                std::ostream& err);

}  // namespace mfsmd
