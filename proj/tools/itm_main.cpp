#include "itm/cli.hpp"

int main(int argc, char** argv) { return itm::run_cli(argc, argv); }
