#include <iostream>

#include "kdeforge/cli.hpp"

int main(int argc, char** argv) { return kdeforge::cli::run(argc, argv, std::cout, std::cerr); }
