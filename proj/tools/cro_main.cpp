#include "cro/expcli.hpp"

int main(int argc, char** argv) { return cro::run_cli(argc, argv); }
