#include <iostream>

#include "twolane/cli.hpp"

int main(int argc, char** argv) { return twolane::cli_main(argc, argv, std::cout, std::cerr); }
