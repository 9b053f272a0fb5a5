#include "viscomem/cli/app.hpp"

int main(int argc, char** argv) { return viscomem::cli::run_cli(argc, argv); }
