#include <iostream>

#include "ubbplan/cli.hpp"

int main(int argc, char** argv) {
    return ubbplan::cli::run(argc, argv, std::cout, std::cerr);
}
