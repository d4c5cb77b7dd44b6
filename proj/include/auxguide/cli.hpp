#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace auxguide::cli {

/// Exit codes: 0 success, 1 failed verification, 2 usage error, 3 I/O or
/// parse error, 4 config error, 5 any other failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace auxguide::cli
