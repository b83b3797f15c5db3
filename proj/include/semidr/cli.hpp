#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace semidr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;

/// Runs one subcommand (estimate, test, simulate, power). `args` excludes the
/// program name. Results go to `out` as key=value lines; diagnostics and
/// usage text go to `err`. Returns 0 on success, 1 on usage or input errors
/// and 2 on numerical failure.
int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace semidr::cli
