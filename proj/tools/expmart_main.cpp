#include "expmart/cli.hpp"

int main(int argc, char** argv) { return expmart::run_command(argc, argv); }
