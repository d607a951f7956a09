#include <iostream>

#include "dire/commands.hpp"

int main(int argc, char** argv) { return dire::run_cli(argc, argv, std::cout, std::cerr); }
