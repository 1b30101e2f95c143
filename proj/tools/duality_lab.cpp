#include "duality_lab/cli.hpp"

int main(int argc, char** argv) { return duality_lab::cli::run(argc, argv); }
