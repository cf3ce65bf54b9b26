#include "dockerdoctor/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return dockerdoctor::cli::main(argc, argv, std::cout, std::cerr);
}
