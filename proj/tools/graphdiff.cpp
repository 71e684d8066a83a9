#include <iostream>

#include "graphdiff/cli.hpp"

int main(int argc, char** argv) { return graphdiff::run_cli(argc, argv, std::cout, std::cerr); }
