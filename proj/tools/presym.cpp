#include <iostream>

#include "presym/cli.hpp"

int main(int argc, char** argv) { return presym::cli::run(argc, argv, std::cout, std::cerr); }
