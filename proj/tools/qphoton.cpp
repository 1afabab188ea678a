#include "qphoton/cli.hpp"

int main(int argc, char** argv) { return qphoton::cli::main(argc, argv); }
