#include "metaflip/cli.hpp"

int main(int argc, char** argv) { return metaflip::run_cli(argc, argv); }
