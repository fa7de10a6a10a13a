#include "cli.hpp"

int main(int argc, char** argv)
{
    return qttlab::run_cli(argc, argv);
}
