#include "biaspot/cli.hpp"

int main(int argc, char** argv) { return biaspot::cli::run(argc, argv); }
