#include <iostream>

#include "archdelta/cli.hpp"

int main(int argc, char** argv) { return archdelta::run_cli(argc, argv, std::cout, std::cerr); }
