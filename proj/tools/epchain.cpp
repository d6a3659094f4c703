#include <iostream>

#include "epchain/commands.hpp"

int main(int argc, char** argv) { return epchain::run_cli(argc, argv, std::cout, std::cerr); }
