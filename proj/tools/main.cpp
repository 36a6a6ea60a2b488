#include <iostream>

#include "snspd/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return snspd::run(args, std::cout, std::cerr);
}
