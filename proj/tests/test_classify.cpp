#include <doctest.h>

#include <cmath>
#include <random>

#include "fiberdyn/classify.hpp"
#include "fiberdyn/families.hpp"
#include "oracles.hpp"

using namespace fiberdyn;
using namespace fiberdyn::classify;

namespace {

TriangularMap tri(const char* f0, const char* f1, const char* phi) {
    return {ScalarFn::parse(f0), ScalarFn::parse(f1), ScalarFn::parse(phi)};
}

}  // namespace

TEST_SUITE("classify") {

TEST_CASE("regimes from f0(u*) and f1(u*)") {
    CHECK(classify_regime(tri("1", "0.5", "u/2"), 0) == Regime::global_attractor);
    CHECK(classify_regime(tri("u", "1+u", "u/2"), 0) == Regime::fixed_point_fiber);
    CHECK(classify_regime(tri("1", "-1", "u/2"), 0) == Regime::two_periodic_fiber);
    CHECK(classify_regime(tri("1", "1", "u/2"), 0) == Regime::unbounded);
    CHECK(classify_regime(tri("0", "2", "u/2"), 0) == Regime::undecided);
    CHECK_THROWS_AS(classify_regime(tri("0", "1", "u/2+1"), 0), NotAFixedPointError);
    CHECK(to_string(Regime::fixed_point_fiber) == "B-fixed-point-fiber");
}

TEST_CASE("regime A: formula limit") {
    const auto r = estimate_limit(tri("1+u", "0.5", "u/2"), {10.0, 0.3}, 0.0);
    CHECK(r.regime == Regime::global_attractor);
    REQUIRE(r.limit.has_value());
    CHECK(*r.limit == doctest::Approx(2.0));
}

TEST_CASE("regime B: certified limit against the product") {
    const auto m = families::example_b(1.0, 0.5);
    const auto cert = auto_certificate(m, 0.0, 0.5);
    REQUIRE(cert.has_value());
    const auto r = estimate_limit(m, {1.0, 0.5}, 0.0, cert);
    REQUIRE(r.limit.has_value());
    CHECK(r.rigorous);
    CHECK(r.error_bound < 1e-9);
    CHECK(std::fabs(*r.limit - oracle::product(1.0, 0.5, 0.5, 200)) < 1e-9);
}

TEST_CASE("regime B without a certificate uses the window heuristic") {
    const auto r = estimate_limit(families::example_b(1.0, 0.5), {1.0, 0.5}, 0.0);
    REQUIRE(r.limit.has_value());
    CHECK_FALSE(r.rigorous);
    CHECK(std::fabs(*r.limit - oracle::product(1.0, 0.5, 0.5, 200)) < 1e-8);
}

TEST_CASE("regime C: parities sum to f0(u*)") {
    const auto r = estimate_limit(tri("1", "-1", "u/2"), {0.25, 0.5}, 0.0);
    CHECK(r.regime == Regime::two_periodic_fiber);
    REQUIRE(r.limit_even.has_value());
    REQUIRE(r.limit_odd.has_value());
    CHECK(*r.limit_even + *r.limit_odd == doctest::Approx(1.0));
}

TEST_CASE("regime C needs a locally contractive phi") {
    const auto r = estimate_limit(tri("1", "-1", "-u-u^3"), {0.25, 0.01}, 0.0);
    CHECK(r.regime == Regime::undecided);
    CHECK_FALSE(r.limit.has_value());
}

TEST_CASE("unbounded orbits escape") {
    const auto m = tri("1", "1", "u/2");
    CHECK(detect_unbounded(m, {0.0, 0.5}, 1e3, 10'000).escaped);
    const auto r = estimate_limit(m, {0.0, 0.5}, 0.0);
    CHECK(r.regime == Regime::unbounded);
    CHECK_FALSE(r.limit.has_value());
}

TEST_CASE("domain errors are reported with their step") {
    const auto r = estimate_limit(tri("0", "1+ln(u)", "u/2"), {1.0, -0.5}, 0.0);
    CHECK(r.domain_error_step.has_value());
}

TEST_CASE("regime-C pairing over random maps") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> d(-1, 1);
        const double us = d(rng), c0 = 2 * d(rng), c1 = 0.5 * d(rng), c2 = d(rng);
        const double lam = (d(rng) < 0 ? -1 : 1) * (0.2 + 0.5 * std::fabs(d(rng)));
        const TriangularMap m{ScalarFn::builtin("f0", [=](double u) { return c0 + c2 * (u - us); }),
                              ScalarFn::builtin("f1", [=](double u) { return -1 + c1 * (u - us); }),
                              ScalarFn::builtin("phi", [=](double u) { return us + lam * (u - us); })};
        const auto r = estimate_limit(m, {2 * d(rng), us + 0.3 * d(rng)}, us);
        REQUIRE(r.limit_even.has_value());
        REQUIRE(r.limit_odd.has_value());
        CHECK(std::fabs(*r.limit_even + *r.limit_odd - c0) < 1e-6);
    }
}

TEST_CASE("rigorous bounds survive ten-fold longer runs") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> d(-1, 1);
        const double a = d(rng), c = d(rng), q = 0.5 * d(rng), lam = 0.2 + 0.6 * std::fabs(d(rng));
        const TriangularMap m{ScalarFn::builtin("f0", [=](double u) { return c * u; }),
                              ScalarFn::builtin("f1", [=](double u) { return 1 + a * u + q * u * u; }),
                              ScalarFn::builtin("phi", [=](double u) { return lam * u; })};
        const State start{2 * d(rng), 0.5 * d(rng)};
        const auto r = estimate_limit(m, start, 0.0, auto_certificate(m, 0.0, 0.5));
        REQUIRE(r.rigorous);
        State s = start;
        for (std::size_t n = 0; n < 10 * r.iterations; ++n) s = m(s);
        CHECK(std::fabs(s.x - *r.limit) <= r.error_bound + 1e-13 * std::max(1.0, std::fabs(s.x)));
    }
}

TEST_CASE("report JSON") {
    const auto j = to_json(estimate_limit(tri("1", "-1", "u/2"), {0.25, 0.5}, 0.0));
    CHECK(j["regime"] == "C-two-periodic-fiber");
    CHECK(j["limit_even"].is_number());
    CHECK(j.contains("error_bound"));
}

}
