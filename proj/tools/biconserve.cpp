#include <iostream>

#include "biconserve/cli.hpp"

int main(int argc, char** argv) { return biconserve::cli::run(argc, argv, std::cout, std::cerr); }
