#pragma once

#include <iosfwd>

namespace eclosure::tools {

// Entry point of the eclosure command; returns the process exit code.
// 0 success, 1 selfcheck mismatch, 2 usage or input error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace eclosure::tools
