#pragma once

#include <string>
#include <vector>

namespace ashield::cli {

// Entry point for the gen-data / train / eval / inspect subcommands.
// Exit codes: 0 success, 2 configuration error, 3 io error, 4 numerical
// failure. Diagnostics go to stderr; machine outputs only to declared files.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace ashield::cli
