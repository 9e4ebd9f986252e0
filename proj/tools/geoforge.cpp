#include "geoforge/cli.hpp"

int main(int argc, char** argv) { return geoforge::run_cli(argc, argv); }
