#include <iostream>

#include "nhvak/cli.hpp"

int main(int argc, char** argv) { return nhvak::run_cli(argc, argv, std::cout, std::cerr); }
