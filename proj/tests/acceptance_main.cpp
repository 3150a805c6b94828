#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "thermoscheme/acceptance.hpp"

// Usage: acceptance [threads] [scratch_dir]
int main(int argc, char** argv) {
  int threads = 2;
  std::string scratch = "acceptance_scratch";
  if (argc > 1) threads = std::atoi(argv[1]);
  if (argc > 2) scratch = argv[2];
  if (threads < 1) threads = 1;

  auto t0 = std::chrono::steady_clock::now();
  std::vector<thermoscheme::AcceptanceResult> results =
      thermoscheme::run_acceptance(scratch, threads);
  auto t1 = std::chrono::steady_clock::now();

  std::cout << thermoscheme::acceptance_table(results);
  std::cerr << "suite finished in "
            << std::chrono::duration_cast<std::chrono::seconds>(t1 - t0).count() << "s with "
            << threads << " worker(s)\n";

  for (const auto& r : results)
    if (!r.pass) return 1;
  return 0;
}
