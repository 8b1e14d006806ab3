#pragma once

#include <ostream>

namespace presym::cli {

enum ExitCode { Success = 0, InputError = 1, BudgetExhausted = 2, NumericFailure = 3 };

/// Runs one command (derive, classify, integrate, report) and returns its exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace presym::cli
