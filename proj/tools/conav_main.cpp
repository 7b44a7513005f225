#include "conav_cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return conav::cli::run_cli(argc, argv, std::cout, std::cerr); }
