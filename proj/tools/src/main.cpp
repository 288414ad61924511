#include "ovepg/cli.hpp"

int main(int argc, char** argv) { return ovepg::cli::run_cli(argc, argv); }
