#include "dalab/run.hpp"

int main(int argc, char** argv) { return dalab::run_cli(argc, argv); }
