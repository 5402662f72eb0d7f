#include <iostream>

#include "calm/cli.hpp"

int main(int argc, char** argv) { return calm::run_cli(argc, argv, std::cout, std::cerr); }
