#include "tucker/cli.hpp"

int main(int argc, char** argv) { return tucker::cli::main_entry(argc, argv); }
