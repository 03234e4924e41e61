#include "seqgen/cli/dispatch.hpp"

int main(int argc, char **argv) { return seqgen::cli::dispatch(argc, argv); }
