#include "cli.hpp"

int main(int argc, char** argv) { return photonloom::cli::run(argc, argv); }
