#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "fiberdyn/parallel.hpp"

using namespace fiberdyn;

TEST_SUITE("parallel") {

TEST_CASE("tabulate: parallel equals serial") {
    const auto f = [](std::size_t i) { return std::sin(0.001 * static_cast<double>(i)) * std::exp(-1e-4 * static_cast<double>(i)); };
    const auto serial = tabulate(10007, f, {Execution::serial, 0});
    for (int jobs : {1, 2, 3, 8}) CHECK(tabulate(10007, f, {Execution::parallel, jobs}) == serial);
    CHECK(tabulate(0, f).empty());
}

TEST_CASE("pairwise_sum") {
    std::vector<double> v(1000);
    std::iota(v.begin(), v.end(), 1.0);
    CHECK(pairwise_sum(v) == 500500.0);
    CHECK(pairwise_sum(std::span<const double>{}) == 0.0);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(-1, 1);
    std::vector<double> w(4097);
    for (auto& x : w) x = d(rng);
    long double exact = 0;
    for (double x : w) exact += x;
    CHECK(std::fabs(pairwise_sum(w) - static_cast<double>(exact)) < 1e-13);
    CHECK(pairwise_sum(w) == pairwise_sum(w));
}

}
