#include "paraug/commands.hpp"

int main(int argc, char** argv) { return paraug::cli::run_cli(argc, argv); }
