#include "pointerlab/scenario.hpp"

int main(int argc, char** argv) {
    return pointerlab::cli::cli_main(argc, argv);
}
