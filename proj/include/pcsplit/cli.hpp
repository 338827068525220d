#pragma once

#include <string>
#include <vector>

#include "pcsplit/solver.hpp"

namespace pcsplit {

// Exit codes: 0 success (solve converged / certificate ok / table
// produced), 2 iteration cap reached, 1 any error.
int cmd_solve(const std::string& problem_file, RunConfig cfg);
int cmd_certify(const std::string& problem_file, RunConfig cfg);
int cmd_compare(const std::string& problem_file, const std::vector<RunConfig>& configs);

int run_cli(int argc, char** argv);

}  // namespace pcsplit
