#pragma once

#include <ostream>

namespace resdiv {

/// Command-line entry point. Exit codes: 0 ok, 1 error (JSON error object on `out`), 2 inconclusive.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace resdiv
