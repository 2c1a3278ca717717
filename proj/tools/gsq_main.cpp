#include "gsq/cli.hpp"

int main(int argc, char** argv) { return gsq::cli::run_cli(argc, argv); }
