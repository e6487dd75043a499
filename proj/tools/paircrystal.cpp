// Command-line entry point; see `paircrystal --help`.
#include <iostream>

#include "paircrystal/cli.hpp"

int main(int argc, char** argv) { return paircrystal::cli::main_entry(argc, argv, std::cout, std::cerr); }
