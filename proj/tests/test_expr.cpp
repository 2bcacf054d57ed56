#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "fiberdyn/expr.hpp"
#include "fiberdyn/scalar_fn.hpp"

using namespace fiberdyn;
using expr::Ast;
using expr::NodeKind;

namespace {

double eval(std::string_view text, double u = 0.0) {
    const auto ast = expr::parse(text);
    return expr::evaluate(ast, std::span<const double>(&u, 1));
}

Ast random_tree(std::mt19937_64& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth == 0 ? 1 : 11);
    std::uniform_real_distribution<double> mag(0.0, 50.0);
    switch (pick(rng)) {
        case 0: return Ast::constant(mag(rng) * std::pow(10.0, std::uniform_int_distribution<int>(-9, 9)(rng)));
        case 1: return Ast::variable("u", 0);
        case 2: return Ast::unary(NodeKind::neg, random_tree(rng, depth - 1));
        case 3: return Ast::unary(NodeKind::abs, random_tree(rng, depth - 1));
        case 4: return Ast::unary(NodeKind::ln, random_tree(rng, depth - 1));
        case 5: return Ast::unary(NodeKind::exp, random_tree(rng, depth - 1));
        case 6: return Ast::unary(NodeKind::sqrt, random_tree(rng, depth - 1));
        case 7: return Ast::binary(NodeKind::add, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
        case 8: return Ast::binary(NodeKind::sub, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
        case 9: return Ast::binary(NodeKind::mul, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
        case 10: return Ast::binary(NodeKind::div, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
        default: return Ast::binary(NodeKind::pow, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    }
}

}  // namespace

TEST_SUITE("expr") {

TEST_CASE("precedence and associativity") {
    CHECK(eval("1+2*3") == 7.0);
    CHECK(eval("(1+2)*3") == 9.0);
    CHECK(eval("8/4/2") == 1.0);
    CHECK(eval("10-4-3") == 3.0);
    CHECK(eval("2^3^2") == 512.0);
    CHECK(eval("-2^2") == -4.0);
    CHECK(eval("2^-1") == 0.5);
    CHECK(eval("--3") == 3.0);
    CHECK(eval("u*u - u", 3.0) == 6.0);
}

TEST_CASE("functions and constants") {
    CHECK(eval("ln(e)") == doctest::Approx(1.0));
    CHECK(eval("sqrt(16)") == 4.0);
    CHECK(eval("abs(-2.5)") == 2.5);
    CHECK(eval("exp(0)") == 1.0);
    CHECK(eval("pi") == std::numbers::pi);
    CHECK(eval("1.5e-3*2") == doctest::Approx(3e-3));
}

TEST_CASE("syntax errors carry an offset") {
    try {
        (void)expr::parse("1+");
        FAIL("no throw");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 2);
        CHECK_FALSE(e.expected().empty());
    }
    CHECK_THROWS_AS(expr::parse("(1"), ParseError);
    CHECK_THROWS_AS(expr::parse("1 2"), ParseError);
    CHECK_THROWS_AS(expr::parse(""), ParseError);
    CHECK_THROWS_AS(expr::parse("sqrt 2"), ParseError);
}

TEST_CASE("undeclared identifiers") {
    try {
        (void)expr::parse("u + x");
        FAIL("no throw");
    } catch (const UnknownIdentifierError& e) {
        CHECK(e.name() == "x");
        CHECK(e.offset() == 4);
    }
    const std::array<std::string, 2> xy{"x", "y"};
    CHECK_NOTHROW(expr::parse("x*y", xy));
}

TEST_CASE("domain violations are NaN with a located sub-expression") {
    CHECK(std::isnan(eval("ln(u)", -1.0)));
    CHECK(std::isnan(eval("1/u", 0.0)));
    CHECK(std::isnan(eval("sqrt(u)", -4.0)));
    const auto ast = expr::parse("1 + ln(u - 2)");
    const double u = 1.0;
    const auto r = expr::evaluate_checked(ast, std::span<const double>(&u, 1));
    REQUIRE_FALSE(r.ok());
    CHECK(r.error->subexpression.find("ln") != std::string::npos);
}

TEST_CASE("malformed trees are rejected") {
    Ast bad = Ast::binary(NodeKind::add, Ast::constant(1), Ast::constant(2));
    bad.children.pop_back();
    CHECK_THROWS_AS(expr::validate(bad, 1), PreconditionError);
    CHECK_THROWS_AS(expr::validate(Ast::variable("v", 3), 1), PreconditionError);
    CHECK_NOTHROW(expr::validate(Ast::variable("u", 0), 1));
}

TEST_CASE("round trip: parse(to_string(t)) == t over random trees") {
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        std::mt19937_64 rng(seed);
        const Ast tree = random_tree(rng, 5);
        const std::string text = expr::to_string(tree);
        CAPTURE(text);
        const Ast back = expr::parse(text);
        CHECK(back == tree);
        CHECK(expr::to_string(back) == text);
    }
}

TEST_CASE("ScalarFn wraps parsed and builtin functions") {
    const auto f = ScalarFn::parse("u^2 - 1");
    CHECK(f(3.0) == 8.0);
    CHECK(f.name() == "(u^2)-1");
    CHECK(ScalarFn::constant(2.5)(100.0) == 2.5);
    CHECK(ScalarFn::constant(2.5).constant_value() == 2.5);
    CHECK(ScalarFn::identity()(-7.0) == -7.0);
    CHECK(ScalarFn{}(4.0) == 0.0);
    const auto g = ScalarFn::parse("t + 1", "t");
    CHECK(g(1.0) == 2.0);
    CHECK_FALSE(ScalarFn::parse("ln(u)").evaluate(-1.0).ok());
}

TEST_CASE("combinators") {
    const auto half = ScalarFn::parse("u/2");
    const auto sq = ScalarFn::parse("u*u");
    CHECK(compose(sq, half)(6.0) == 9.0);
    CHECK(power_iterate(half, 3)(8.0) == 1.0);
    CHECK(power_iterate(half, 0)(8.0) == 8.0);
    CHECK((half + sq)(2.0) == 5.0);
    CHECK((half * sq)(2.0) == 4.0);
}

TEST_CASE("derivatives: closed form when attached, central difference otherwise") {
    const auto f = ScalarFn::parse("u^3");
    CHECK(numeric_derivative(f, 2.0) == doctest::Approx(12.0).epsilon(1e-7));
    const auto g = ScalarFn::builtin("cube", [](double u) { return u * u * u; })
                       .with_derivative(ScalarFn::builtin("3u^2", [](double u) { return 3 * u * u; }));
    CHECK(g.has_derivative());
    CHECK(numeric_derivative(g, 2.0) == 12.0);
    const auto h = compose(g, ScalarFn::builtin("2u", [](double u) { return 2 * u; })
                                  .with_derivative(ScalarFn::constant(2.0)));
    REQUIRE(h.has_derivative());
    CHECK(numeric_derivative(h, 1.0) == doctest::Approx(24.0));
    CHECK(std::isnan(numeric_derivative(ScalarFn::parse("sqrt(u)"), 0.0)));
}

TEST_CASE("bivariate functions") {
    const auto f = BivariateFn::parse("x*y + 1");
    CHECK(f(2.0, 3.0) == 7.0);
    CHECK_THROWS_AS(BivariateFn::parse("x*u"), UnknownIdentifierError);
}

}
