#include "eqarm/cli.hpp"

int main(int argc, char** argv) { return eqarm::run_cli(argc, argv); }
