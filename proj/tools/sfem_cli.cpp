#include "sfem/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return sfem::run_cli(argc, argv, std::cout, std::cerr); }
