#include "vidpipe/cli.hpp"

int main(int argc, char **argv) { return vidpipe::cli_main(argc, argv); }
