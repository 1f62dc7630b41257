#include <iostream>

#include "cli_app.hpp"

int main(int argc, char** argv)
{
    return eidcloud::cli::run({argv, argv + argc}, std::cout, std::cerr);
}
