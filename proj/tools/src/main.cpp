#include <iostream>
#include <string>
#include <vector>

#include "vpfix/tools/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return vpfix::tools::run_cli(args, std::cout, std::cerr);
}
