#include <iostream>
#include <string>
#include <vector>

#include "abstain/cli/commands.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return abstain::run_cli(args, std::cout, std::cerr);
}
