#include <iostream>
#include <string>
#include <vector>

#include "dpps/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dpps::run_cli(args, std::cout, std::cerr);
}
