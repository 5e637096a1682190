#pragma once

#include <iosfwd>

namespace rgi::cli {

/// Runs the `rgi` command line. Errors are reported on `err` as a one-line
/// JSON object {"error": <code>, "message": <text>} and yield a nonzero
/// return value.
int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rgi::cli
