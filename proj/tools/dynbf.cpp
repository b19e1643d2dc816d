#include "dynbf/cli.hpp"

int main(int argc, char** argv) { return dynbf::run_cli(argc, argv); }
