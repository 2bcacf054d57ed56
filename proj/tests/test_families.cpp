#include <doctest.h>

#include <cmath>
#include <random>

#include "fiberdyn/classify.hpp"
#include "fiberdyn/families.hpp"
#include "oracles.hpp"

using namespace fiberdyn;
using namespace fiberdyn::families;

namespace {

bool close(double a, double b, double rel = 1e-12) { return std::fabs(a - b) <= rel * std::max(1.0, std::fabs(b)); }

}  // namespace

TEST_SUITE("families") {

TEST_CASE("ipow is exact for small integer powers") {
    CHECK(ipow(-2.0, 3) == -8.0);
    CHECK(ipow(3.0, 0) == 1.0);
    CHECK(ipow(2.0, -2) == 0.25);
}

TEST_CASE("power perturbation: invariant curve and its closed-form orbit") {
    const auto sys = power_perturbation_map({0.5, 1.0, 1.0, 1, 2});
    CHECK(sys.gamma.alpha == -1.0);
    CHECK(sys.gamma.level == 1.0);
    CHECK(sys.growth == 2.0);
    State s = sys.gamma.point_at(0.5);
    CHECK(s.x == 2.0);
    const State start = s;
    for (std::size_t n = 1; n <= 20; ++n) {
        s = sys.map(s);
        CHECK(close(sys.gamma.defining_quantity(s), 1.0, 1e-12));
        CHECK(close(s.x, sys.closed_form(start, n).x, 1e-12));
    }
    CHECK_THROWS_AS(power_perturbation_map({0.5, 3.0, 1.0, 2, 3}).gamma.point_at(1.0), PreconditionError);
}

TEST_CASE("examples B to E") {
    const auto b = example_b(1.0, 0.5);
    State s{1.0, 0.5};
    for (int n = 0; n < 200; ++n) s = b(s);
    CHECK(close(s.x, oracle::product(1.0, 0.5, 0.5, 200)));

    const auto c = example_c(0.5);
    CHECK(c.f1(0.0) == 1.0);
    CHECK(c.f1(std::exp(-1.0)) == doctest::Approx(2.0));
    const auto env = example_c_envelope(0.5, 0.5);
    CHECK(env.V(std::exp(-2.0)) == doctest::Approx(0.5));
    CHECK_THROWS_AS(example_c_envelope(0.5, 1.5), PreconditionError);

    const auto d = example_d(-1.0, 1.0, 1.0, 0.5);
    CHECK(classify::classify_regime(d, 0.0) == classify::Regime::two_periodic_fiber);

    const auto e = example_e(1.0, 1.0, 2.0, 2.0);
    CHECK(e.phi(0.5) == 0.25);
    CHECK(e.f1(0.5) == 1.25);
}

TEST_CASE("propoexemple: psi from the planar map, invariant fibers") {
    const auto ex = propoexemple_map(0.8);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> d(-3, 3);
    for (int i = 0; i < 100; ++i) {
        const double x = d(rng), y = d(rng);
        CHECK(close(ex.reduction.psi(x * y), oracle::psi_from_planar(x, y, 0.8), 1e-12));
        const State img = ex.reduction.planar({x, y});
        CHECK(close(img.x * img.u, ex.reduction.psi(ex.reduction.fiber(x, y)), 1e-12));
    }
    REQUIRE(ex.invariant_products.size() == 5);
    const double qm = 1 - std::sqrt(13.0), qp = 1 + std::sqrt(13.0);
    CHECK(std::fabs(ex.reduction.psi(qp) - qm) < 1e-12);
    CHECK(std::fabs(ex.reduction.psi(qm) - qp) < 1e-12);
    CHECK(ex.reduction.origin_attracts());
    CHECK_FALSE(propoexemple_map(2.0).reduction.origin_attracts());
}

TEST_CASE("quasi-homogeneous fibration is exact on dyadic points") {
    const QuasiHomogeneousMap m{1, -1, ScalarFn::parse("(1+u)/4"), ScalarFn::parse("u/2 - 1/8")};
    const auto red = quasi_homogeneous_to_triangular(m, Side::x_side);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 100; ++i) {
        const double x = oracle::dyadic(rng), y = oracle::dyadic(rng);
        const State img = red.planar({x, y});
        CHECK(red.fiber(img.x, img.u) == red.psi(red.fiber(x, y)));
        CHECK(red.triangular({x, red.fiber(x, y)}).x == img.x);
    }
}

TEST_CASE("Moebius classification and preimages") {
    CHECK(mobius_classify(2, 1).kind == MobiusCase::to_zero);
    CHECK(mobius_classify(0.5, 1).kind == MobiusCase::to_nonzero_fixed_point);
    CHECK(mobius_classify(-1, 1).kind == MobiusCase::two_periodic);
    CHECK(mobius_classify(1, 1).kind == MobiusCase::to_zero_parabolic);
    CHECK_THROWS_AS(mobius_classify(1, 0), PreconditionError);
    const auto m = mobius_classify(0.5, 2);
    CHECK(m.pole == -0.25);
    CHECK_FALSE(std::isfinite(m.phi(m.pole)));
    CHECK(close(m.phi(*m.preimage(0.3)), 0.3));
    CHECK_FALSE(m.preimage(0.5).has_value());
    const auto ex = m.excluded_points(5);
    REQUIRE(ex.size() >= 3);
    CHECK(ex[0] == m.pole);
    for (std::size_t k = 0; k + 1 < ex.size(); ++k) CHECK(close(m.phi(ex[k + 1]), ex[k], 1e-10));
}

TEST_CASE("rational recurrence: closed forms") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> d(0.5, 2);
    for (int i = 0; i < 50; ++i) {
        const double x0 = d(rng), x1 = -d(rng);
        const auto t = bajo_liz_system(-1, 1).iterate(x0, x1, 30);
        REQUIRE(t.x.size() == 30);
        const double c = x0 * x1 - 1;
        for (std::size_t n = 0; n < 15; ++n) {
            CHECK(close(t.x[2 * n], x0 / std::pow(c, double(n)), 1e-9));
            CHECK(close(t.x[2 * n + 1], x1 * std::pow(c, double(n)), 1e-9));
        }
        const auto p = bajo_liz_system(1, 1).iterate(x0, -x1, 30);
        for (std::size_t n = 0; n < 15; ++n) {
            const double v0 = -x0 * x1;
            CHECK(close(p.x[2 * n] * p.x[2 * n + 1], v0 / (1 + 2 * v0 * double(n)), 1e-9));
        }
    }
}

TEST_CASE("rational recurrence: case predictions") {
    using B = BajoLizBehavior;
    CHECK(bajo_liz_system(0.5, 1).predict(0, 0).behavior == B::zero_forever);
    CHECK(bajo_liz_system(2, 1).predict(1, 2).behavior == B::converges_to_zero);
    CHECK(bajo_liz_system(2, 1).predict(1, -1).behavior == B::two_periodic);
    CHECK(bajo_liz_system(0.5, 1).predict(1, 2).behavior == B::tends_to_two_cycle);
    CHECK(bajo_liz_system(0.5, 1).predict(1, 0.5).behavior == B::two_periodic);
    CHECK(bajo_liz_system(0.5, 1).predict(1, 0).behavior == B::unbounded);
    CHECK(bajo_liz_system(-1, 1).predict(1, 3).behavior == B::unbounded);
    CHECK(bajo_liz_system(-1, 1).predict(1, 2).behavior == B::two_periodic);
    CHECK(bajo_liz_system(-1, 1).predict(1, 0).behavior == B::four_periodic);
    CHECK(bajo_liz_system(-1, 2).predict(1, 1).behavior == B::two_periodic);
    CHECK(bajo_liz_system(-1, 2).predict(1, 2).behavior == B::unbounded);
    CHECK(bajo_liz_system(1, 1).predict(1, 0).behavior == B::two_periodic);
    CHECK(bajo_liz_system(1, 1).predict(1, 2).behavior == B::converges_to_zero);
    CHECK(bajo_liz_system(0.5, 1).predict(1, -0.5).behavior == B::outside_good_set);
    const auto t = bajo_liz_system(0.5, 1).iterate(1, -0.5, 10);
    CHECK(t.reason == RecurrenceStop::left_good_set);
    CHECK(t.x.size() == 2);
}

TEST_CASE("rational recurrence: parity limits multiply to u*") {
    const auto sys = bajo_liz_system(0.5, 1);
    const auto starts = sys.parity_starts(1, 2);
    REQUIRE(starts.size() == 2);
    double prod = 1;
    for (const auto& s : starts) {
        const auto r = classify::estimate_limit(sys.reduction(), s, 0.5);
        REQUIRE(r.limit.has_value());
        prod *= *r.limit;
    }
    CHECK(prod == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("multiplicative order k: interleaving is exact on dyadic starts") {
    for (int k = 2; k <= 4; ++k) {
        const auto red = multiplicative_order_k(
            {k, ScalarFn::builtin("g", [](double v) { return std::fabs(v) > 1 ? 0.5 : -2.0; })});
        std::mt19937_64 rng(k);
        for (int i = 0; i < 40; ++i) {
            std::vector<double> init;
            for (int j = 0; j < k; ++j) init.push_back(std::ldexp(double(std::uniform_int_distribution<int>(1, 7)(rng)), -2));
            CHECK(red.interleave(init, 30) == red.raw(init, 30));
        }
    }
    CHECK(multiplicative_order_k({3, ScalarFn::parse("-1+u")}).zero_fiber_case() == ZeroFiberCase::period_2k);
    CHECK(multiplicative_order_k({3, ScalarFn::parse("1+u")}).zero_fiber_case() == ZeroFiberCase::period_k);
    CHECK(multiplicative_order_k({3, ScalarFn::parse("0.5")}).zero_fiber_case() == ZeroFiberCase::to_zero);
    CHECK(multiplicative_order_k({3, ScalarFn::parse("2")}).zero_fiber_case() == ZeroFiberCase::unbounded);
    CHECK_THROWS_AS(multiplicative_order_k({1, ScalarFn::parse("2")}), PreconditionError);
}

TEST_CASE("additive recurrence") {
    const auto g = ScalarFn::parse("(u+1)/2");
    const auto sys = additive_system({0.5, g});
    const auto x = sys.raw(0.25, -1.5, 30);
    State s = sys.start(0.25, -1.5);
    for (std::size_t n = 0; n + 1 < x.size(); ++n) {
        CHECK(close(s.x, x[n]));
        CHECK(close(s.u, x[n + 1] + 0.5 * x[n]));
        s = sys.map(s);
    }
    CHECK(*sys.predicted_limit(1.0) == doctest::Approx(2.0 / 3));
    CHECK(sys.predict(1.0) == AdditiveBehavior::converges);
    CHECK(additive_system({1.0, g}).predict(1.0) == AdditiveBehavior::two_periodic);
    CHECK(additive_system({-1.0, g}).predict(1.0) == AdditiveBehavior::unbounded);
    CHECK(additive_system({-1.0, g}).predict(0.0) == AdditiveBehavior::fixed_limit);
    CHECK_FALSE(additive_system({1.0, g}).predicted_limit(1.0).has_value());
}

TEST_CASE("examples H to K reproduce their recurrences") {
    const auto h = example_H_system(0.5, 1.0);
    const auto xh = h.raw(1.0, 2.0, 0.5, 41);
    for (std::size_t i = 0; i < 4; ++i) {
        State s{xh[i], xh[i] * xh[i + 2]};
        for (std::size_t j = i; j < xh.size(); j += 4) {
            CHECK(close(s.x, xh[j], 1e-10));
            s = h.subsystem(s);
        }
    }

    const auto ei = example_I_system(2.0, ScalarFn::parse("1/(1+u)"));
    CHECK_THROWS_AS(ei.start(-1, 1), PreconditionError);
    {
        double x0 = 1.5, x1 = 0.7;
        State s = ei.start(x0, x1);
        for (int n = 0; n < 10; ++n) {
            CHECK(close(std::exp(s.x), x0, 1e-10));
            const double u = x1 * x0 * x0;
            const double x2 = x0 * x0 * (1.0 / (1.0 + u)) / x1;
            x0 = x1;
            x1 = x2;
            s = ei.map(s);
        }
    }

    const auto ej = example_J_system(3, ScalarFn::parse("-u/4"));
    const auto xj = ej.raw({1.0, -2.0, 0.5}, 40);
    for (std::size_t i = 0; i < 3; ++i) {
        State s{xj[i], xj[i] + xj[i + 1] + xj[i + 2]};
        for (std::size_t j = i; j < xj.size(); j += 3) {
            CHECK(close(s.x, xj[j], 1e-10));
            s = ej.subsystem(s);
        }
    }

    const auto f = ScalarFn::parse("-u/2");
    const auto ek = example_K_system(0.5, f);
    double a = 1.0, b = 3.0;
    State s{a, b + 0.5 * a};
    for (int n = 0; n < 20; ++n) {
        CHECK(close(s.x, a));
        const double c = 0.5 * a + 0.5 * b + f(b + 0.5 * a);
        a = b;
        b = c;
        s = ek(s);
    }
}

TEST_CASE("registry instantiates every family with its defaults") {
    for (const auto& info : registry()) {
        CAPTURE(info.name);
        const auto inst = make_family(info.name);
        CHECK(inst.family == info.name);
        CHECK(inst.params == info.defaults);
        if (inst.order > 0) {
            std::vector<double> init(inst.order, 0.75);
            CHECK_FALSE(inst.parity_starts(init).empty());
        }
    }
    CHECK_THROWS_AS(make_family("nope"), PreconditionError);
    CHECK_THROWS_AS(make_family("bajo-liz", {{"zz", 1}}), PreconditionError);
    CHECK_THROWS_AS(make_family("bajo-liz", {{"a", "half"}}), PreconditionError);
    CHECK_THROWS_AS(make_family("multiplicative", {{"k", 2.5}}), PreconditionError);
    CHECK(make_family("bajo-liz", {{"a", 0.5}}).u_star == 0.5);
}

}
