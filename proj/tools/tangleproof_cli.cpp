#include "tangleproof/cli.hpp"

int main(int argc, char** argv) { return tangleproof::cli::dispatch(argc, argv); }
