#include "qfilter/cli.hpp"

int main(int argc, char** argv) { return qfilter::run_cli(argc, argv); }
