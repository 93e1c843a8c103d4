#pragma once

#include <iosfwd>

namespace cisc {

/// Exit codes: 0 success, 1 runtime failure, 2 input or flag validation error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cisc
