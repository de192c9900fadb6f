#include "dodlab/cli.hpp"

int main(int argc, char** argv) { return dodlab::run_cli(argc, argv); }
