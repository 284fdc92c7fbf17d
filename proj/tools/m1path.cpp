#include "m1path/cli.hpp"

int main(int argc, char** argv) { return m1path::run(argc, argv); }
