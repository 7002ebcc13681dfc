#include <iostream>
#include <string>
#include <vector>

#include "mmpen/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return mmpen::run_cli(args, std::cout, std::cerr);
}
