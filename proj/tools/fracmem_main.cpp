#include "fracmem/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return fracmem::cli_main(argc, argv, std::cout, std::cerr); }
