#include "cli.hpp"

int main(int argc, char** argv) { return bpcalc::cli::run(argc, argv); }
