#include "colddiff_cli.hpp"

int main(int argc, char** argv) { return colddiff::cli::run(argc, argv); }
