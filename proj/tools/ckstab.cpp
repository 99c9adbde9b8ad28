#include "ckstab/cli.hpp"

int main(int argc, char** argv) { return ckstab::cli::run(argc, argv); }
