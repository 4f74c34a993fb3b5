#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace genperf::cli {

/// Runs the genperf command line. Reports go to `out`, diagnostics to `err`.
/// Returns the process exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace genperf::cli
