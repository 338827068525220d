#include "pcsplit/cli.hpp"

int main(int argc, char** argv) { return pcsplit::run_cli(argc, argv); }
