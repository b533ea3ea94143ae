#include <iostream>
#include <string>
#include <vector>

#include "easl/cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return easl::cli::run_cli(args, std::cout, std::cerr);
}
