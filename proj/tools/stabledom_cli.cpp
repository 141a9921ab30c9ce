#include "stabledom/cli.hpp"

int main(int argc, char** argv) { return stabledom::cli_main(argc, argv); }
