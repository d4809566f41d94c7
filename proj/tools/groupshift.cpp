// Command-line entry point. Subcommands are thin wrappers over the library;
// exit codes: 0 ok, 2 spec error, 3 resource limit, 4 numeric nonconvergence.
#include <iostream>

#include "groupshift/groupshift.hpp"

int main(int argc, char** argv) { return groupshift::cli::run(argc, argv); }
