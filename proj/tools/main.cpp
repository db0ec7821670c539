#include "cli_app.hpp"

int main(int argc, char** argv) { return eegstem::cli::run(argc, argv); }
