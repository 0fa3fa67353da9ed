#include <iostream>

#include "aesprice/cli.hpp"

int main(int argc, char** argv) { return aesprice::run_cli(argc, argv, std::cout, std::cerr); }
