#include "udiv_cli/commands.hpp"

int main(int argc, char** argv) { return udiv::cli::main_entry(argc, argv); }
