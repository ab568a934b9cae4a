#include "contab/cli.hpp"

int main(int argc, char** argv) { return contab::cli_main(argc, argv); }
