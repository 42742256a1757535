#include "gsched/cli.hpp"

int main(int argc, char** argv) { return gsched::cli::run(argc, argv); }
