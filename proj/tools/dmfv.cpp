#include <iostream>

#include "dmfv/app.hpp"

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return dmfv::run_cli(args, std::cout, std::cerr);
}
