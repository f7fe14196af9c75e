#include "omfbm/cli.hpp"

int main(int argc, char** argv) { return omfbm::cli_main(argc, argv); }
