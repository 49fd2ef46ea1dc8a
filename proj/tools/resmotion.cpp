#include <iostream>

#include "resmotion/cli.hpp"

int main(int argc, char** argv) { return resmotion::run_cli(argc, argv, std::cout, std::cerr); }
