#pragma once

// Subcommand dispatch.  Returns the process exit code: 0 ok, 2 usage or
// config error, 3 statistics error, 4 IO error.

namespace spinsim {

int run_cli(int argc, const char* const* argv);

}  // namespace spinsim
