#include <doctest.h>

#include <cmath>
#include <limits>

#include "fiberdyn/families.hpp"
#include "fiberdyn/fecld.hpp"
#include "oracles.hpp"

using namespace fiberdyn;
using namespace fiberdyn::fecld;

TEST_SUITE("fecld") {

TEST_CASE("decay sequences") {
    const auto g = DecaySequence::geometric(0.5, 0.25);
    CHECK(g[0] == 0.5);
    CHECK(g[3] == 0.5 / 64);
    CHECK(g.shifted(2)[0] == g[2]);
    CHECK(g.every_other()[3] == g[6]);

    const auto p = DecaySequence::power_law(2.0, 1.5);
    CHECK(p[0] == 2.0);
    CHECK(p[1] == 2.0);
    CHECK(p[4] == doctest::Approx(2.0 / 8.0));
    CHECK(p.every_other()[2] == doctest::Approx(p[4]));

    const auto t = DecaySequence::table({1.0, 0.5, 0.25});
    CHECK_FALSE(t.closed_form());
    CHECK(t.size() == 3);
    CHECK_FALSE(t.power_tail(1.0, 0).has_value());
}

TEST_CASE("geometric tails match brute-force sums") {
    const auto g = DecaySequence::geometric(0.8, 0.6);
    for (double e : {0.5, 1.0, 2.0}) {
        for (std::size_t n : {0u, 3u, 10u}) {
            double brute = 0.0;
            for (std::size_t j = n; j < n + 2000; ++j) brute += std::pow(g[j], e);
            CHECK(*g.power_tail(e, n) == doctest::Approx(brute).epsilon(1e-12));
        }
    }
}

TEST_CASE("power-law tails bound the sum and diverge when e r <= 1") {
    const auto p = DecaySequence::power_law(1.0, 0.75);
    for (double e : {2.0, 3.0}) {
        for (std::size_t n : {0u, 1u, 5u, 50u}) {
            double brute = 0.0;
            for (std::size_t j = n; j < 2'000'000; ++j) brute += std::pow(p[j], e);
            const double bound = *p.power_tail(e, n);
            CHECK(bound >= brute);
            CHECK(bound <= 1.5 * brute + 2.0);
        }
    }
    CHECK(std::isinf(*p.power_tail(1.0, 0)));
    CHECK(std::isinf(*p.power_tail(4.0 / 3.0, 0)));
}

TEST_CASE("anchoring keeps the first term above the value") {
    const auto g = DecaySequence::geometric(1.0, 0.5).anchored_to(0.3);
    CHECK(g[0] >= 0.3);
    const auto p = DecaySequence::power_law(1.0, 1.0).anchored_to(0.01);
    CHECK(p[0] >= 0.01);
}

TEST_CASE("envelopes") {
    const auto e = Envelope::sum({{2.0, 1.0}, {3.0, 2.0}});
    CHECK(e(0.5) == doctest::Approx(1.75));
    CHECK(e.closed_form());
    CHECK(*e.sup_closed_form(0.5) == doctest::Approx(1.75));
    CHECK(Envelope::zero().is_zero());
    CHECK((2.0 * Envelope::power(1.0, 1.0))(0.25) == 0.5);
    CHECK((Envelope::power(1.0, 1.0) + Envelope::power(1.0, 2.0))(0.5) == 0.75);
    const auto f = Envelope::function(ScalarFn::parse("u/2"));
    CHECK_FALSE(f.closed_form());
    CHECK(f(0.5) == 0.25);
}

TEST_CASE("product system with its hyperbolic envelope is certified") {
    const auto m = families::example_b(1.0, 0.5);
    const auto env = hyperbolic_envelope(m, 0.0, 0.5);
    CHECK(env.V(0.25) == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(env.W.is_zero());
    CHECK(env.p[1] == doctest::Approx(0.25).epsilon(1e-9));
    const auto c = check_certificate(m, 0.0, env);
    CHECK(c.verdict == Verdict::certified_by_closed_form);
    CHECK(c.h1.status == CheckStatus::pass);
    CHECK(c.h2.status == CheckStatus::pass);
    CHECK(c.h3.status == CheckStatus::pass);
    CHECK(c.h4.status == CheckStatus::pass);
    CHECK(c.S_V == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("serial and parallel checks agree exactly") {
    const auto m = families::example_b(1.0, 0.5);
    const auto env = hyperbolic_envelope(m, 0.0, 0.5);
    CertificateOptions s;
    s.parallel = {Execution::serial, 1};
    CertificateOptions p;
    p.parallel = {Execution::parallel, 3};
    CHECK(to_json(check_certificate(m, 0.0, env, s)) == to_json(check_certificate(m, 0.0, env, p)));
}

TEST_CASE("an envelope that is too small is refuted with a reproducible witness") {
    const auto m = families::example_b(1.0, 0.5);
    EnvelopeSpec env{Envelope::power(0.1, 1.0), Envelope::zero(), 0.5, DecaySequence::geometric(0.5, 0.5)};
    const auto c = check_certificate(m, 0.0, env);
    CHECK(c.verdict == Verdict::refuted);
    CHECK(c.h2.status == CheckStatus::fail);
    REQUIRE(c.h2.witness.has_value());
    CHECK(witness_reproduces(m, 0.0, env, 2, *c.h2.witness));
    CHECK_THROWS_AS(cauchy_tail_bound(c, 1.0, 0), PreconditionError);
}

TEST_CASE("H4 fails when p_0 exceeds epsilon") {
    const auto m = families::example_b(1.0, 0.5);
    EnvelopeSpec env{Envelope::power(1.0, 1.0), Envelope::zero(), 0.5, DecaySequence::geometric(0.9, 0.5)};
    CHECK(check_certificate(m, 0.0, env).h4.status == CheckStatus::fail);
}

TEST_CASE("a harmonic-like envelope is not certified") {
    const auto m = families::example_c(0.5);
    const auto env = families::example_c_envelope(0.5, 0.5);
    const auto c = check_certificate(m, 0.0, env);
    CHECK(c.verdict != Verdict::certified_by_closed_form);
    CHECK(c.h4.status != CheckStatus::pass);
    CHECK(c.divergence_suspected);
}

TEST_CASE("preconditions") {
    const TriangularMap a{ScalarFn{}, ScalarFn::constant(0.5), ScalarFn::parse("u/2")};
    EnvelopeSpec env{Envelope::zero(), Envelope::zero(), 0.5, DecaySequence::geometric(0.5, 0.5)};
    CHECK_THROWS_AS(check_certificate(a, 0.0, env), PreconditionError);
    const TriangularMap expanding{ScalarFn{}, ScalarFn::constant(1.0), ScalarFn::parse("2*u")};
    CHECK_THROWS_AS(hyperbolic_envelope(expanding, 0.0, 0.5), NotHyperbolicError);
    CertificateOptions few;
    few.samples = 10;
    CHECK_THROWS_AS(check_certificate(families::example_b(1.0, 0.5), 0.0, env, few), PreconditionError);
}

TEST_CASE("Cauchy tail bound dominates the observed remainder") {
    const auto m = families::example_b(1.0, 0.5);
    const auto c = check_certificate(m, 0.0, hyperbolic_envelope(m, 0.0, 0.5));
    const double limit = oracle::product(1.0, 0.5, 0.5, 200);
    double x = 1.0;
    double u = 0.5;
    for (std::size_t n = 0; n < 40; ++n) {
        CHECK(std::fabs(limit - x) <= cauchy_tail_bound(c, 3.0, n) + 1e-15);
        x *= 1.0 + u;
        u *= 0.5;
    }
}

TEST_CASE("two-step envelope certifies the two-step system") {
    const TriangularMap m{ScalarFn::parse("u"), ScalarFn::parse("-1+u"), ScalarFn::parse("u/2")};
    const auto env = hyperbolic_envelope(m, 0.0, 0.25);
    const auto env2 = two_step_envelope(m, 0.0, env);
    const auto c = check_certificate(two_step(m), 0.0, env2);
    CHECK(c.verdict == Verdict::certified_by_closed_form);
}

TEST_CASE("certificate JSON keys") {
    const auto m = families::example_b(1.0, 0.5);
    const auto j = to_json(check_certificate(m, 0.0, hyperbolic_envelope(m, 0.0, 0.5)));
    for (const char* k : {"verdict", "u_star", "epsilon", "H1", "H2", "H3", "H4", "S_V", "S_W", "envelope"}) {
        CHECK(j.contains(k));
    }
    CHECK(j["verdict"] == "certified-by-closed-form");
}

}
