#include "owlaudit/cli.hpp"

int main(int argc, char** argv) { return owlaudit::cli::main(argc, argv); }
