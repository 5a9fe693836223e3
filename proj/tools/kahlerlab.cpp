#include "kahler/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return kahler::cli::run(argc, argv, std::cout, std::cerr); }
