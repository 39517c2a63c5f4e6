#include "lotaru/cli.hpp"

int main(int argc, char** argv) { return lotaru::cli::run(argc, argv); }
