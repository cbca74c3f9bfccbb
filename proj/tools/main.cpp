#include <iostream>
#include <string>
#include <vector>

#include "rummi/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return rummi::cli::run(args, std::cout, std::cerr);
}
