#include "gosp/cli.hpp"

int main(int argc, char** argv) { return gosp::cli::main(argc, argv); }
