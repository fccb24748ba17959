#include "clens/cli.hpp"

int main(int argc, char** argv) { return clens::cli::run(argc, argv); }
