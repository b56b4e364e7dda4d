#include <iostream>

#include "blend/cli.hpp"

int main(int argc, char** argv) { return blend::cli::run(argc, argv, std::cout, std::cerr); }
