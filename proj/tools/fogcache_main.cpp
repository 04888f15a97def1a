#include <iostream>

#include "fogcache/cli.hpp"

int main(int argc, char** argv) {
  return fogcache::cli::main_entry(argc, argv, std::cout, std::cerr);
}
