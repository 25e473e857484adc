#include "sqlab/cli.hpp"

int main(int argc, char** argv) { return sqlab::run_cli(argc, argv); }
