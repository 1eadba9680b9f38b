#include <iostream>

#include "somno/cli.hpp"

int main(int argc, char** argv) {
  return somno::cli::run(argc, argv, std::cout, std::cerr);
}
