#include "hetnet/cli.hpp"

int main(int argc, char** argv) { return hetnet::cli::run(argc, argv); }
