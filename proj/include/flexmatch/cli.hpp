#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace flexmatch {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCriteriaFailed = 1;
inline constexpr int kExitParameter = 2;
inline constexpr int kExitNumeric = 3;

/// Runs one command line (without the program name). Results go to `out` unless
/// --out is given; diagnostics and usage go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace flexmatch
