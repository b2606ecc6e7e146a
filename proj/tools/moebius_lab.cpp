#include <iostream>

#include "mlab/io/cli.hpp"

int main(int argc, char** argv) { return mlab::io::cli_main(argc, argv, std::cout, std::cerr); }
