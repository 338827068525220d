#pragma once

#include <string>

#include "pcsplit/problem.hpp"
#include "pcsplit/solver.hpp"

namespace pcsplit {

// Load a problem from the JSON layout documented in the README:
//   { "m": int, "sense": "eq"|"ge", "rhs": [..],
//     "blocks": [ { "kind": "quadratic"|"l1"|"zero"|"box",
//                   "params": {..}, "A": [[..],..], "set": {..} } ] }
// Errors carry the offending field path.
ProblemInstance load_problem(const std::string& path);

void write_solution_json(const std::string& path, const ProblemInstance& p,
                         const RunConfig& cfg, const SolveResult& result);

}  // namespace pcsplit
