#include <iostream>

#include "fpcli.hpp"

int main(int argc, char** argv) {
  return fpcli::main_entry(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
