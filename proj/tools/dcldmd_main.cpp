#include "dcldmd/cli_app.hpp"

int main(int argc, char** argv) { return dcldmd::cli::run_cli(argc, argv); }
