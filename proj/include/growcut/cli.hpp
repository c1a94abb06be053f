#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace growcut::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kValidation = 2,
    kIo = 3,
    kNotConverged = 4,
};

/// Entry point of the `growcut` tool; `args` excludes the program name.
/// Subcommands: segment, evaluate, resample, phantom, post, sphere-seed.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace growcut::cli
