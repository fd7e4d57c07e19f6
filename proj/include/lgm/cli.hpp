#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lgm {

/// Command-line surface. Exit codes: 0 success, 2 usage error, 3 numerical
/// failure. Every run echoes its fully resolved configuration so outputs are
/// reproducible from the log alone.
int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace lgm
