#include "fiberdyn/scalar_fn.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace fiberdyn {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_constant(double c) {
    std::array<char, 64> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", c);
    return buf.data();
}

}  // namespace

ScalarFn::ScalarFn() : ScalarFn(constant(0.0)) {}

ScalarFn ScalarFn::builtin(std::string name, Callable f) {
    auto impl = std::make_shared<Impl>();
    impl->name = std::move(name);
    impl->fn = std::move(f);
    return ScalarFn(std::move(impl));
}

ScalarFn ScalarFn::constant(double c) {
    auto impl = std::make_shared<Impl>();
    impl->name = format_constant(c);
    impl->fn = [c](double) { return c; };
    impl->constant = c;
    auto zero = std::make_shared<Impl>();
    zero->name = "0";
    zero->fn = [](double) { return 0.0; };
    zero->constant = 0.0;
    // The derivative of a constant is the zero constant; the zero constant is its own derivative.
    if (c != 0.0) {
        impl->derivative = std::make_shared<const ScalarFn>(ScalarFn(std::move(zero)));
    }
    return ScalarFn(std::move(impl));
}

ScalarFn ScalarFn::identity() {
    return builtin("u", [](double u) { return u; }).with_derivative(constant(1.0));
}

ScalarFn ScalarFn::from_ast(expr::Ast ast, std::string variable) {
    expr::validate(ast, 1);
    auto impl = std::make_shared<Impl>();
    impl->name = expr::to_string(ast);
    impl->variable = std::move(variable);
    auto tree = std::make_shared<const expr::Ast>(std::move(ast));
    if (tree->kind == expr::NodeKind::constant) impl->constant = tree->value;
    impl->ast = tree;
    impl->fn = [tree](double u) { return expr::evaluate(*tree, std::span<const double>(&u, 1)); };
    return ScalarFn(std::move(impl));
}

ScalarFn ScalarFn::parse(std::string_view text, std::string variable) {
    const std::array<std::string, 1> vars{variable};
    return from_ast(expr::parse(text, vars), std::move(variable));
}

expr::Evaluation ScalarFn::evaluate(double u) const {
    if (impl_->ast) return expr::evaluate_checked(*impl_->ast, std::span<const double>(&u, 1));
    const double v = impl_->fn(u);
    if (std::isnan(v)) return {v, DomainError{impl_->name, "outside the function's domain"}};
    return {v, {}};
}

const ScalarFn& ScalarFn::derivative() const {
    if (!impl_->derivative) {
        if (impl_->constant && *impl_->constant == 0.0) return *this;
        throw PreconditionError("function '" + impl_->name + "' has no closed-form derivative");
    }
    return *impl_->derivative;
}

ScalarFn ScalarFn::with_derivative(ScalarFn d) const {
    auto impl = std::make_shared<Impl>(*impl_);
    impl->derivative = std::make_shared<const ScalarFn>(std::move(d));
    return ScalarFn(std::move(impl));
}

ScalarFn compose(const ScalarFn& outer, const ScalarFn& inner) {
    if (auto c = outer.constant_value()) return ScalarFn::constant(*c);
    ScalarFn result = ScalarFn::builtin(outer.name() + " o (" + inner.name() + ")",
                                        [outer, inner](double u) { return outer(inner(u)); });
    if (outer.has_derivative() && inner.has_derivative()) {
        result = result.with_derivative(compose(outer.derivative(), inner) * inner.derivative());
    }
    return result;
}

ScalarFn power_iterate(const ScalarFn& f, int times) {
    if (times < 0) throw PreconditionError("power_iterate: negative iteration count");
    if (times == 0) return ScalarFn::identity();
    ScalarFn result = f;
    for (int i = 1; i < times; ++i) result = compose(f, result);
    return result;
}

ScalarFn operator+(const ScalarFn& a, const ScalarFn& b) {
    if (a.constant_value() && b.constant_value()) {
        return ScalarFn::constant(*a.constant_value() + *b.constant_value());
    }
    if (a.constant_value() == 0.0) return b;
    if (b.constant_value() == 0.0) return a;
    ScalarFn result = ScalarFn::builtin("(" + a.name() + ")+(" + b.name() + ")",
                                        [a, b](double u) { return a(u) + b(u); });
    const bool da = a.has_derivative() || a.constant_value();
    const bool db = b.has_derivative() || b.constant_value();
    if (da && db) result = result.with_derivative(a.derivative() + b.derivative());
    return result;
}

ScalarFn operator*(const ScalarFn& a, const ScalarFn& b) {
    if (a.constant_value() && b.constant_value()) {
        return ScalarFn::constant(*a.constant_value() * *b.constant_value());
    }
    if (a.constant_value() == 0.0 || b.constant_value() == 0.0) return ScalarFn::constant(0.0);
    if (a.constant_value() == 1.0) return b;
    if (b.constant_value() == 1.0) return a;
    ScalarFn result = ScalarFn::builtin("(" + a.name() + ")*(" + b.name() + ")",
                                        [a, b](double u) { return a(u) * b(u); });
    const bool da = a.has_derivative() || a.constant_value();
    const bool db = b.has_derivative() || b.constant_value();
    if (da && db) result = result.with_derivative(a.derivative() * b + a * b.derivative());
    return result;
}

double default_step(double point) noexcept { return 1e-6 * std::max(1.0, std::fabs(point)); }

double numeric_derivative(const ScalarFn& f, double point, std::optional<double> step) {
    if (f.constant_value()) return 0.0;
    if (f.has_derivative()) return f.derivative()(point);
    const double h = step.value_or(default_step(point));
    if (!(h > 0.0)) throw PreconditionError("numeric_derivative: step must be positive");
    const double hi = f(point + h);
    const double lo = f(point - h);
    if (std::isnan(hi) || std::isnan(lo)) return kNaN;
    return (hi - lo) / (2.0 * h);
}

BivariateFn::BivariateFn() : BivariateFn(builtin("0", [](double, double) { return 0.0; })) {}

BivariateFn BivariateFn::builtin(std::string name, Callable f) {
    auto impl = std::make_shared<Impl>();
    impl->name = std::move(name);
    impl->fn = std::move(f);
    return BivariateFn(std::move(impl));
}

BivariateFn BivariateFn::parse(std::string_view text) {
    static const std::array<std::string, 2> kXY{"x", "y"};
    auto impl = std::make_shared<Impl>();
    auto tree = std::make_shared<const expr::Ast>(expr::parse(text, kXY));
    impl->ast = tree;
    impl->name = expr::to_string(*tree);
    impl->fn = [tree](double x, double y) {
        const std::array<double, 2> p{x, y};
        return expr::evaluate(*tree, p);
    };
    return BivariateFn(std::move(impl));
}

expr::Evaluation BivariateFn::evaluate(double x, double y) const {
    const std::array<double, 2> p{x, y};
    if (impl_->ast) return expr::evaluate_checked(*impl_->ast, p);
    const double v = impl_->fn(x, y);
    if (std::isnan(v)) return {v, DomainError{impl_->name, "outside the function's domain"}};
    return {v, {}};
}

}  // namespace fiberdyn
