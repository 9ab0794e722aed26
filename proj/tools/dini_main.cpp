#include <iostream>

#include "dini/cli.hpp"

int main(int argc, char** argv) { return dini::cli::main(argc, argv, std::cout, std::cerr); }
