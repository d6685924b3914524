#include <iostream>
#include <string>
#include <vector>

#include "metrolab/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return metrolab::run_cli(std::move(args), std::cout, std::cerr);
}
