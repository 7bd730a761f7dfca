#include "evokit/cli.hpp"

int main(int argc, char** argv) { return evokit::run(argc, argv); }
