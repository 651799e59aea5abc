#include <iostream>

#include "resdiv/cli.hpp"

int main(int argc, char** argv) { return resdiv::run_cli(argc, argv, std::cout, std::cerr); }
