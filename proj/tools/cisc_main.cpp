#include <iostream>

#include "cisc/cli.hpp"

int main(int argc, char** argv) { return cisc::run_cli(argc, argv, std::cout, std::cerr); }
