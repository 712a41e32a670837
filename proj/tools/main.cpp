#include "dreamespase/cli.hpp"

int main(int argc, char** argv) { return dreamespase::cli::run(argc, argv); }
