#include "rolesim/commands.hpp"

int main(int argc, char** argv) { return rolesim::run_cli(argc, argv); }
