#include "vcergm/cli.hpp"

int main(int argc, char** argv) { return vcergm::cli::run(argc, argv); }
