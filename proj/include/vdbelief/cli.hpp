#pragma once

#include <string>
#include <vector>

namespace vdbelief {

// Entry point shared by the binary and the CLI tests. Returns the process
// exit code: 0 success, 1 domain/usage errors, 2 IO or parse errors.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args); // args without argv[0]

} // namespace vdbelief
