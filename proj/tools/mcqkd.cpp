#include <iostream>

#include "cli/app.hpp"

int main(int argc, char** argv)
{
    return mcqkd::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
