#pragma once

#include <iosfwd>

namespace fracperim {

/// Command-line entry point. Exit codes: 0 pass, 1 computational or verdict
/// failure, 2 usage or config error. Errors go to `err` as one line starting
/// with "error: <kind>: ".
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fracperim
