#include <doctest.h>

#include <cmath>

#include "fiberdyn/families.hpp"
#include "fiberdyn/jacobsthal.hpp"

using namespace fiberdyn;
using namespace fiberdyn::jacobsthal;

TEST_SUITE("jacobsthal") {

TEST_CASE("predicted constants") {
    CHECK(predicted_limit(2, 1) == 1.0);
    CHECK(predicted_limit(3, 2) == doctest::Approx(0.5));
    CHECK(predicted_limit(3, 1.0 / 6) == doctest::Approx(std::sqrt(3.0)));
}

TEST_CASE("x - x^2: n u_n -> 1") {
    const auto f = ScalarFn::builtin("q", [](double x) { return x - x * x; });
    const auto r = verify_jacobsthal(f, 2, 1, 0.5, {10'000, 100, 1000});
    CHECK(r.probes == std::vector<std::size_t>{100, 1000, 10'000});
    CHECK(std::fabs(r.values.back() - 1.0) < 0.01);
    CHECK(std::fabs(r.values[2] - 1.0) < std::fabs(r.values[0] - 1.0));
}

TEST_CASE("sin: sqrt(n) u_n -> sqrt 3") {
    const auto f = ScalarFn::builtin("sin", [](double x) { return std::sin(x); });
    const auto r = verify_jacobsthal(f, 3, 1.0 / 6, 1.0, {100'000});
    CHECK(r.relative_error < 0.01);
}

TEST_CASE("precondition violations carry a witness") {
    const auto half = ScalarFn::builtin("half", [](double x) { return x / 2; });
    try {
        (void)verify_jacobsthal(half, 2, 1, 0.5, {10});
        FAIL("no throw");
    } catch (const PreconditionViolated& e) {
        CHECK(e.witness() == 1e-4);
    }
    const auto up = ScalarFn::builtin("up", [](double x) { return x + x * x; });
    CHECK_THROWS_AS(verify_jacobsthal(up, 2, 1, 0.5, {10}), PreconditionViolated);
    CHECK_THROWS_AS(verify_jacobsthal(up, 0.5, 1, 0.5, {10}), PreconditionError);
    CHECK_THROWS_AS(verify_jacobsthal(up, 2, 1, 0.5, {}), PreconditionError);
}

TEST_CASE("decay sequence exponent") {
    const auto p = jacobsthal_decay(2, 1, 0.01);
    CHECK(p[0] == 1.0);
    CHECK(p[100] == doctest::Approx(std::pow(100.0, -0.99)));
    CHECK_THROWS_AS(jacobsthal_decay(3, 1, 0.6), PreconditionError);
}

TEST_CASE("H4 with the decay sequence is refuted exactly when alpha (1 - delta) <= 1") {
    const auto p = jacobsthal_decay(2, 1, 0.01);
    for (double alpha = 0.5; alpha <= 3.0; alpha += 0.125) {
        const auto m = families::example_e(1, 1, alpha, 2);
        fecld::EnvelopeSpec env{fecld::Envelope::power(1, alpha), fecld::Envelope::zero(), 1.0, p};
        const auto c = fecld::check_certificate(m, 0.0, env);
        CAPTURE(alpha);
        CHECK((c.verdict == fecld::Verdict::refuted) == (alpha * 0.99 <= 1.0));
    }
}

TEST_CASE("report JSON") {
    const auto f = ScalarFn::builtin("q", [](double x) { return x - x * x; });
    const auto j = to_json(verify_jacobsthal(f, 2, 1, 0.5, {50}));
    CHECK(j["predicted"] == 1.0);
    CHECK(j["values"].size() == 1);
}

}
