#include "auxguide/cli.hpp"

int main(int argc, char** argv) { return auxguide::cli::run(argc, argv); }
