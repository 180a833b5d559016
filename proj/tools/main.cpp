#include "primeforms/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return primeforms::cli::dispatch(argc, argv, std::cout, std::cerr); }
