#include <iostream>
#include <string>
#include <vector>

#include "wakefar/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return wakefar::run(args, std::cout, std::cerr);
}
