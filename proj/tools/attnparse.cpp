#include <iostream>
#include <string>
#include <vector>

#include "attnparse/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return attnparse::cli::run(args, std::cout, std::cerr);
}
