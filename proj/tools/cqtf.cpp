#include "cqtf/cli.hpp"

int main(int argc, char** argv) { return cqtf::run(argc, argv); }
