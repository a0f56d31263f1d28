#include <iostream>
#include <string>
#include <vector>

#include "bpalm/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return bpalm::cli::run(args, std::cout, std::cerr);
}
