#include "stablelab/cli.hpp"

int main(int argc, char** argv) { return stablelab::cli_main(argc, argv); }
