#include <iostream>
#include <string>
#include <vector>

#include "unarysim/cli.hpp"

int main(int argc, char** argv) {
  return unarysim::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
