#include "cli.hpp"

int main(int argc, char** argv) { return goal::cli::run_cli(argc, argv); }
