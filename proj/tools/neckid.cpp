#include <iostream>

#include "neck/cli.hpp"

int main(int argc, char** argv) { return neck::cli::run_command_line(argc, argv, std::cout, std::cerr); }
