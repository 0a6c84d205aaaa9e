#include <iostream>
#include <string>
#include <vector>

#include "memviz/cli.hpp"

int main(int argc, char **argv) {
  std::vector<std::string> args(argv, argv + argc);
  return memviz::cli::run(args, std::cout, std::cerr);
}
