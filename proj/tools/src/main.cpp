#include <iostream>

#include "eclosure_tools/cli.hpp"

int main(int argc, char** argv) { return eclosure::tools::run_cli(argc, argv, std::cout, std::cerr); }
