#include <iostream>

#include "gclab/cli.hpp"

int main(int argc, char** argv) { return gclab::run_cli(argc, argv, std::cout, std::cerr); }
