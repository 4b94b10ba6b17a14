#include <iostream>

#include "issgain/cli.hpp"

int main(int argc, char** argv) { return issgain::cli::run(argc, argv, std::cout, std::cerr); }
