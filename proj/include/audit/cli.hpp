#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace audit {

/// Exit codes of the `audit` binary.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,    // bad flags, ConfigError
    kExitIo = 2,       // IoError, filesystem failures
    kExitData = 3,     // FormatError, ParseError, DimensionError, DataError
    kExitNumeric = 4,  // NumericError
};

/// Runs `audit <gen|fingerprint|compare|degrade|train|attack|embed> [flags]`.
/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace audit
