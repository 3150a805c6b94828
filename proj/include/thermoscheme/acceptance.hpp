#pragma once

#include <string>
#include <vector>

namespace thermoscheme {

struct AcceptanceResult {
  int criterion = 0;
  bool pass = false;
  std::string detail;
};

// Runs the 13-criterion verification suite.  scratch_dir receives the file
// outputs produced while exercising the determinism criterion; threads is the
// worker cap for the parallel paths.
std::vector<AcceptanceResult> run_acceptance(const std::string& scratch_dir, int threads);

std::string acceptance_table(const std::vector<AcceptanceResult>& results);

}  // namespace thermoscheme
