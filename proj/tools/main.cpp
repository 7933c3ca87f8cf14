#include "cli.hpp"

int main(int argc, char** argv) { return skilldyn::cli::run(argc, argv); }
