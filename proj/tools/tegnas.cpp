#include "tegnas/cli/cli.hpp"

int main(int argc, char** argv) { return tegnas::cli::run(argc, argv); }
