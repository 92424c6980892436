#include <iostream>

#include "multitime_cli/app.hpp"

int main(int argc, char** argv) {
    return multitime::cli::run_app(argc, argv, std::cout, std::cerr);
}
