#include "cilab_cli/cli.hpp"

int main(int argc, char** argv) {
    return cilab::cli::run(argc, argv);
}
