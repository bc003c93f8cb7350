#include "locpower/cli.hpp"

int main(int argc, char** argv) { return locpower::run_cli(argc, argv); }
