#include "tdmic/cli.hpp"

int main(int argc, char** argv) { return tdmic::run_cli(argc, argv); }
