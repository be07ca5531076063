#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return maskslic::cli_run(argc, argv, std::cout, std::cerr);
}
