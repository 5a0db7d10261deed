#include <iostream>

#include "wafx/cli.hpp"

int main(int argc, char** argv) {
  return wafx::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
