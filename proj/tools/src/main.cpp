#include <iostream>

#include "truncchain_cli/cli.hpp"

int main(int argc, char** argv) { return truncchain::cli::main_entry(argc, argv, std::cout, std::cerr); }
