#include "cli/commands.hpp"

int main(int argc, char** argv) { return mmdalign::cli::run(argc, argv); }
