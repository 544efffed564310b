#include <iostream>

#include "mdf/cli.hpp"

int main(int argc, char** argv) { return mdf::cli::run(argc, argv, std::cout, std::cerr); }
