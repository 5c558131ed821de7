#include "ipcnn/cli.hpp"

int main(int argc, char** argv) { return ipcnn::cli::run_cli(argc, argv); }
