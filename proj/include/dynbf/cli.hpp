#pragma once

namespace dynbf {

// Command-line entry point. Exit codes: 0 success, 1 usage or internal error,
// 2 infeasible input, 3 verification failure.
int run_cli(int argc, const char* const* argv);

}  // namespace dynbf
