// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace smartcomp {

/// Exit codes: 0 success, 2 validation or usage, 3 admission control
/// required, 4 numerical failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitAdmission = 3;
inline constexpr int kExitNumerical = 4;

/// Subcommands generate, solve, evaluate and bench. args excludes the
/// program name.
int runCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace smartcomp
