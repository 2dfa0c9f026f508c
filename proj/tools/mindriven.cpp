// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "mindriven/cli.hpp"

int main(int argc, char** argv) {
  return mindriven::cli::main_entry(argc, argv, std::cout, std::cerr);
}
