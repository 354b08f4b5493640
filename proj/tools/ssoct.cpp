#include <iostream>

#include "ssoct/cli.hpp"

int main(int argc, char** argv) { return ssoct::cli::run(argc, argv, std::cout, std::cerr); }
