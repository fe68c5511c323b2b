// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "cspt/error.hpp"

namespace cspt {

inline constexpr std::string_view kVersion = "1.0.0";

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 1;
inline constexpr int input = 2;
inline constexpr int budget = 3;
inline constexpr int sat = 10;
inline constexpr int unsat = 20;
} // namespace exit_code

int exit_code_for(ErrorCode code);

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name. Diagnostics go to `err` as "error: <code>: <message>".
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace cspt
