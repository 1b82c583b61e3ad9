#include "aft/cli.hpp"

int main(int argc, char** argv) { return aft::cli::run(argc, argv); }
