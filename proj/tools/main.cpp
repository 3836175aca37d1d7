#include <iostream>

#include "bandfit/cli.hpp"

int main(int argc, char** argv) { return bandfit::cli::run(argc, argv, std::cout, std::cerr); }
