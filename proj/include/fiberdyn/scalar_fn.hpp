#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "fiberdyn/expr.hpp"

namespace fiberdyn {

/// A pure real function of one variable: a built-in closure or a parsed
/// expression, optionally carrying a closed-form derivative.
///
/// Calling the function returns a quiet NaN when the point lies outside its
/// natural domain; evaluate() reports which sub-expression failed. Instances
/// are immutable and cheap to copy (shared state).
class ScalarFn {
public:
    using Callable = std::function<double(double)>;

    /// The zero function.
    ScalarFn();

    static ScalarFn builtin(std::string name, Callable f);
    static ScalarFn constant(double c);
    static ScalarFn identity();
    static ScalarFn parse(std::string_view text, std::string variable = "u");
    static ScalarFn from_ast(expr::Ast ast, std::string variable = "u");

    double operator()(double u) const noexcept { return impl_->fn(u); }
    expr::Evaluation evaluate(double u) const;

    const std::string& name() const noexcept { return impl_->name; }
    const std::string& variable() const noexcept { return impl_->variable; }
    const expr::Ast* ast() const noexcept { return impl_->ast.get(); }
    std::optional<double> constant_value() const noexcept { return impl_->constant; }

    bool has_derivative() const noexcept { return impl_->derivative != nullptr; }
    /// Closed-form derivative; precondition: has_derivative().
    const ScalarFn& derivative() const;
    ScalarFn with_derivative(ScalarFn d) const;

private:
    struct Impl {
        std::string name;
        std::string variable = "u";
        Callable fn;
        std::shared_ptr<const expr::Ast> ast;
        std::optional<double> constant;
        std::shared_ptr<const ScalarFn> derivative;
    };
    explicit ScalarFn(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

    std::shared_ptr<const Impl> impl_;
};

// Combinators. Derivatives are propagated (chain/product rule) when every
// operand carries one.
ScalarFn compose(const ScalarFn& outer, const ScalarFn& inner);
ScalarFn power_iterate(const ScalarFn& f, int times);
ScalarFn operator+(const ScalarFn& a, const ScalarFn& b);
ScalarFn operator*(const ScalarFn& a, const ScalarFn& b);

/// Default finite-difference step: 1e-6 * max(1, |point|).
double default_step(double point) noexcept;

/// f'(point): the closed-form derivative when present, otherwise the central
/// difference (f(p+h) - f(p-h)) / 2h. NaN when f leaves its domain.
double numeric_derivative(const ScalarFn& f, double point, std::optional<double> step = std::nullopt);

/// A pure real function of (x, y).
class BivariateFn {
public:
    using Callable = std::function<double(double, double)>;

    BivariateFn();
    static BivariateFn builtin(std::string name, Callable f);
    static BivariateFn parse(std::string_view text);  // variables "x", "y"

    double operator()(double x, double y) const noexcept { return impl_->fn(x, y); }
    expr::Evaluation evaluate(double x, double y) const;
    const std::string& name() const noexcept { return impl_->name; }

private:
    struct Impl {
        std::string name;
        Callable fn;
        std::shared_ptr<const expr::Ast> ast;
    };
    explicit BivariateFn(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

    std::shared_ptr<const Impl> impl_;
};

}  // namespace fiberdyn
