#include <iostream>

#include "nematic/cli.hpp"

int main(int argc, char** argv) { return nematic::run_cli(argc, argv, std::cout, std::cerr); }
