#include "vdbelief/cli.hpp"

int main(int argc, char** argv) { return vdbelief::run_cli(argc, argv); }
