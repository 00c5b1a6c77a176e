#include <iostream>

#include "mmag/cli.hpp"

int main(int argc, char** argv) { return mmag::cli::run(argc, argv, std::cout, std::cerr); }
