#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mcqkd::cli {

// Exit codes: 0 ok, 2 bad parameters or config, 3 outside the modulation regime, 4 internal inconsistency.
inline constexpr int exit_ok = 0;
inline constexpr int exit_parameter = 2;
inline constexpr int exit_regime = 3;
inline constexpr int exit_consistency = 4;

// args[0] is the program name. Data goes to out (or --out), diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace mcqkd::cli
