#include "cli.hpp"

int main(int argc, char** argv) { return mucs::cli::run(argc, argv); }
