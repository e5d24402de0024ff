#include <iostream>
#include <string>
#include <vector>

#include "kpp/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return kpp::run_cli(args, std::cout, std::cerr);
}
