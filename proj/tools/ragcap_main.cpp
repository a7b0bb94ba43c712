#include <iostream>
#include <string>
#include <vector>

#include "ragcap/pipeline/commands.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return ragcap::pipeline::run_cli(args, std::cout, std::cerr);
}
