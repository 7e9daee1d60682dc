#include "ashield/cli.hpp"

int main(int argc, char** argv) { return ashield::cli::run(argc, argv); }
