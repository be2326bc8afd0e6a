#include "hopfcone/cli.hpp"

int main(int argc, char** argv) { return hopfcone::run_cli(argc, argv); }
