#include <iostream>

#include "slicedmi/cli.hpp"

int main(int argc, char** argv) { return slicedmi::cli_main(argc, argv, std::cout, std::cerr); }
