#include <iostream>
#include <string>
#include <vector>

#include "kbmaint/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return kbm::run_cli(args, std::cout, std::cerr);
}
