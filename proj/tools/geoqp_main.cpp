#include "geoqp/cli.hpp"

int main(int argc, char** argv) { return geoqp::cli::run(argc, argv); }
