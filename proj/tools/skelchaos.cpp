#include "skelchaos/cli.hpp"

int main(int argc, char** argv) { return skelchaos::run_cli(argc, argv); }
