#pragma once

#include "tpnn/error.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace tpnn::cli {

/// Process exit codes of tpnnc. Stable: scripts depend on them.
enum ExitCode : int {
    kOk = 0,
    kVerificationFailed = 1, // lint finding or diff divergence
    kUsage = 2,
    kIo = 3,
    kManifestSyntax = 4,
    kUnsupportedVersion = 5,
    kChecksum = 6,
    kWeightsLength = 7,
    kInvalidNetwork = 8,
    kCodegen = 9,
    kInputShape = 10,
    kFormat = 11,
    kUnsupportedLayer = 12,
};

int exit_code_for(ErrorCode code);

/// Runs tpnnc with `args` (program name excluded), writing normal output
/// to `out` and diagnostics to `err`. Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace tpnn::cli
