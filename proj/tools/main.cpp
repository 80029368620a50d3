#include <iostream>

#include "qtail/cli.hpp"

int main(int argc, char** argv) { return qtail::cli::main(argc, argv, std::cout, std::cerr); }
