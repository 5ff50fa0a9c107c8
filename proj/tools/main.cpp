#include "cli.hpp"

int main(int argc, char** argv) { return setdist::cli::run(argc, argv); }
