#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace locpower {

/// Exit codes: 0 success, 1 infeasible or failed cross-check, 2 bad input.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_cli(int argc, char** argv);

}  // namespace locpower
