#include "llcomb/cli.hpp"
#include "llcomb/runtime.hpp"

#include <iostream>

int main(int argc, char** argv) {
    llcomb::configure_allocator();
    return llcomb::run_cli(argc, argv, std::cout, std::cerr);
}
