#include <iostream>

#include "hkdelay/commands.hpp"

int main(int argc, char** argv) { return hkdelay::run_cli(argc, argv, std::cout, std::cerr); }
