#include "fracperim/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return fracperim::run_cli(argc, argv, std::cout, std::cerr); }
