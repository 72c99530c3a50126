#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qwalk::cli {

// Runs one CLI invocation (args exclude the program name). Returns the
// process exit code; all writes go to the given streams so the driver is
// testable in-process.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qwalk::cli
