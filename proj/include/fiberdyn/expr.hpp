#pragma once

// Scalar expression language used for user-supplied maps.
//
// Grammar:
//   expr   := term (("+"|"-") term)*
//   term   := factor (("*"|"/") factor)*
//   factor := ("-")* power
//   power  := atom ("^" factor)?
//   atom   := number | ident | ident "(" expr ")" | "(" expr ")"
//
// Functions: abs, ln, exp, sqrt. Constants: pi, e.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fiberdyn/error.hpp"

namespace fiberdyn::expr {

enum class NodeKind {
    constant,
    variable,
    neg,
    abs,
    ln,
    exp,
    sqrt,
    add,
    sub,
    mul,
    div,
    pow,
};

/// Arity of a node kind (0 for leaves, 1 for unary ops, 2 for binary ops).
int arity(NodeKind kind) noexcept;

struct Ast {
    NodeKind kind = NodeKind::constant;
    double value = 0.0;       // constant
    std::string name;         // variable
    std::size_t slot = 0;     // variable index into the declared variable list
    std::vector<Ast> children;

    bool operator==(const Ast&) const = default;

    static Ast constant(double v);
    static Ast variable(std::string name, std::size_t slot);
    static Ast unary(NodeKind kind, Ast child);
    static Ast binary(NodeKind kind, Ast lhs, Ast rhs);
};

/// Parses `text` against the declared variable names. Throws ParseError on
/// syntax errors and UnknownIdentifierError on undeclared names.
Ast parse(std::string_view text, std::span<const std::string> variables);
Ast parse(std::string_view text);  // single variable "u"

/// Prints an expression that reparses to a structurally identical tree.
std::string to_string(const Ast& ast);

/// Evaluates bottom-up. Domain violations yield a quiet NaN.
double evaluate(const Ast& ast, std::span<const double> point) noexcept;

/// Same as evaluate(), but reports the innermost offending sub-expression.
struct Evaluation {
    double value = 0.0;
    std::optional<DomainError> error;

    bool ok() const noexcept { return !error.has_value(); }
};
Evaluation evaluate_checked(const Ast& ast, std::span<const double> point);

/// Throws PreconditionError unless every node has the arity its kind requires
/// and every variable slot is below `variable_count`.
void validate(const Ast& ast, std::size_t variable_count);

}  // namespace fiberdyn::expr
