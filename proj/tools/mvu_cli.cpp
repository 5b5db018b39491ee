#include "cli.hpp"

int main(int argc, char** argv) { return mvu::cli_main(argc, argv); }
