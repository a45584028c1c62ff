#include <iostream>

#include "closeness/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return closeness::cli::run(args, std::cout, std::cerr);
}
