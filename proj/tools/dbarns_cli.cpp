#include "dbarns/cli.hpp"

int main(int argc, char** argv) { return dbarns::cli_main(argc, argv); }
