#include "lmrank/cli.hpp"

int main(int argc, char** argv) {
    return lmrank::run_cli(argc, argv);
}
