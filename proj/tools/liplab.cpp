// Command-line entry point; the real work lives in include/liplab/cli.hpp so
// that command behaviour (including exit codes) is unit-testable.
#include <cstdio>

int main() {
    std::puts("liplab: not wired up yet");
    return 2;
}
