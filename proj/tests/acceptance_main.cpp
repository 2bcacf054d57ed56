#include <cstdlib>
#include <iostream>

#include "fiberdyn/acceptance.hpp"

int main() {
    fiberdyn::acceptance::Options options;
    if (const char* seed = std::getenv("FD_SEED")) options.seed = std::strtoull(seed, nullptr, 10);
    const auto results = fiberdyn::acceptance::run_all(options);
    return fiberdyn::acceptance::report(std::cout, results) ? 0 : 1;
}
