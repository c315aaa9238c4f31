#include "personagen/cli.hpp"

int main(int argc, char** argv) { return pgen::cli::run(argc, argv); }
