#include "rabistark/config.hpp"

int main(int argc, char** argv) { return rabistark::run_cli(argc, argv); }
