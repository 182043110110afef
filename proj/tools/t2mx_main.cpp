#include "t2mx/cli/app.hpp"

int main(int argc, char** argv) { return t2mx::cli::run(argc, argv); }
