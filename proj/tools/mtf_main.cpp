#include "mtfest/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return mtfest::run_cli(argc, argv, std::cout, std::cerr); }
