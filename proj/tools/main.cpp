#include <iostream>

#include "mnshape_cli.hpp"

int main(int argc, char** argv) { return mnshape::cli::cli_main(argc, argv, std::cout, std::cerr); }
