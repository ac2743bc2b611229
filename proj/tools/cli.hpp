#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace switchbox::cli {

enum ExitCode : int {
    kOk = 0,
    kChecksFailed = 1,
    kUsage = 2,
    kBadProblem = 3,
    kSolverFailure = 4,
    kIoFailure = 5,
};

// args excludes the program name. Results go to out; a failure writes exactly one
// line "error: <category>: <message>" to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace switchbox::cli
