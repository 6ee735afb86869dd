#include "../src/cli/runner.hpp"

int main(int argc, char** argv) { return qfc::cli::cli_main(argc, argv); }
