#include <iostream>
#include <string>
#include <vector>

#include "thermoscheme/run.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return thermoscheme::run_command(args, std::cout, std::cerr);
}
