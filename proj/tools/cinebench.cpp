#include "cinebench/cli/app.hpp"

int main(int argc, char** argv) { return cinebench::cli::run(argc, argv); }
