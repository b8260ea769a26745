#include "specnet/cli.hpp"

int main(int argc, char** argv) { return specnet::cli::dss_main(argc, argv); }
