#include "resilex/cli.hpp"

int main(int argc, char** argv) { return resilex::cli_main(argc, argv); }
