#include "cli.hpp"

int main(int argc, char** argv) { return polylab::cli::main_entry(argc, argv); }
