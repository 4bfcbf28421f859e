#include <iostream>

#include "velomule/cli.hpp"

int main(int argc, char** argv) {
  return velomule::cli_main(argc, argv, std::cout, std::cerr, velomule::process_env());
}
