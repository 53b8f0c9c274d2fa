#include <iostream>

#include "scidraft/cli/commands.hpp"

int main(int argc, char** argv) { return scidraft::cli::run(argc, argv, std::cout, std::cerr); }
