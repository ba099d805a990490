#include <iostream>

#include "nbem/cli.hpp"

int main(int argc, char** argv) { return nbem::run_cli(argc, argv, std::cout, std::cerr); }
