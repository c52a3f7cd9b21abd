#include "audit/cli.hpp"

int main(int argc, char** argv) { return audit::run_cli(argc, argv); }
