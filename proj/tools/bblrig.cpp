#include "bbl/cli/run.hpp"

int main(int argc, char** argv) { return bbl::cli::run(argc, argv); }
