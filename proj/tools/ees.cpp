#include <iostream>

#include "ees/cli.hpp"

int main(int argc, char** argv) { return ees::cli::run(argc, argv, std::cout, std::cerr); }
