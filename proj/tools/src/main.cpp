#include "pcadb_cli/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return pcadb::cli::run(argc, argv, std::cout, std::cerr); }
