#include "fiberdyn/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace fiberdyn::expr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct FunctionName {
    std::string_view name;
    NodeKind kind;
};

constexpr std::array<FunctionName, 4> kFunctions{{
    {"abs", NodeKind::abs},
    {"ln", NodeKind::ln},
    {"exp", NodeKind::exp},
    {"sqrt", NodeKind::sqrt},
}};

std::string_view function_name(NodeKind kind) {
    for (const auto& f : kFunctions) {
        if (f.kind == kind) return f.name;
    }
    return {};
}

class Parser {
public:
    Parser(std::string_view text, std::span<const std::string> variables)
        : text_(text), variables_(variables) {}

    Ast parse_all() {
        Ast result = parse_expr();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected trailing input", {"+", "-", "*", "/", "^", "end of input"});
        return result;
    }

private:
    [[noreturn]] void fail(const std::string& what, std::vector<std::string> expected) const {
        std::string message = what + " at offset " + std::to_string(pos_);
        if (!expected.empty()) {
            message += "; expected one of:";
            for (const auto& e : expected) message += " '" + e + "'";
        }
        throw ParseError(message, pos_, std::move(expected));
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Ast parse_expr() {
        Ast lhs = parse_term();
        for (;;) {
            if (accept('+')) {
                lhs = Ast::binary(NodeKind::add, std::move(lhs), parse_term());
            } else if (accept('-')) {
                lhs = Ast::binary(NodeKind::sub, std::move(lhs), parse_term());
            } else {
                return lhs;
            }
        }
    }

    Ast parse_term() {
        Ast lhs = parse_factor();
        for (;;) {
            if (accept('*')) {
                lhs = Ast::binary(NodeKind::mul, std::move(lhs), parse_factor());
            } else if (accept('/')) {
                lhs = Ast::binary(NodeKind::div, std::move(lhs), parse_factor());
            } else {
                return lhs;
            }
        }
    }

    Ast parse_factor() {
        if (accept('-')) return Ast::unary(NodeKind::neg, parse_factor());
        return parse_power();
    }

    Ast parse_power() {
        Ast base = parse_atom();
        if (accept('^')) return Ast::binary(NodeKind::pow, std::move(base), parse_factor());
        return base;
    }

    Ast parse_atom() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input", {"number", "identifier", "("});
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Ast inner = parse_expr();
            if (!accept(')')) fail("unbalanced parenthesis", {")"});
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        fail(std::string("unexpected character '") + c + "'", {"number", "identifier", "("});
    }

    Ast parse_number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            std::size_t n = 0;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                ++pos_;
                ++n;
            }
            return n;
        };
        std::size_t mantissa_digits = digits();
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            mantissa_digits += digits();
        }
        if (mantissa_digits == 0) {
            pos_ = start;
            fail("malformed number", {"digit"});
        }
        // An exponent is only consumed when digits follow, so "2*e" and "2e" stay unambiguous.
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t look = pos_ + 1;
            if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
            if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
                pos_ = look;
                digits();
            }
        }
        double value = 0.0;
        const auto* first = text_.data() + start;
        const auto* last = text_.data() + pos_;
        const auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || ptr != last) {
            pos_ = start;
            fail("malformed number", {"number"});
        }
        return Ast::constant(value);
    }

    Ast parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            ++pos_;
        }
        const std::string_view ident = text_.substr(start, pos_ - start);

        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == '(') {
            for (const auto& f : kFunctions) {
                if (f.name == ident) {
                    ++pos_;
                    Ast arg = parse_expr();
                    if (!accept(')')) fail("unbalanced parenthesis in call", {")"});
                    return Ast::unary(f.kind, std::move(arg));
                }
            }
            throw UnknownIdentifierError(std::string(ident), start);
        }

        for (std::size_t i = 0; i < variables_.size(); ++i) {
            if (variables_[i] == ident) return Ast::variable(std::string(ident), i);
        }
        if (ident == "pi") return Ast::constant(std::numbers::pi);
        if (ident == "e") return Ast::constant(std::numbers::e);
        throw UnknownIdentifierError(std::string(ident), start);
    }

    std::string_view text_;
    std::span<const std::string> variables_;
    std::size_t pos_ = 0;
};

bool is_binary(NodeKind k) { return arity(k) == 2; }

bool needs_parens_as_operand(const Ast& a) { return is_binary(a.kind) || a.kind == NodeKind::neg; }

std::string format_number(double v) {
    std::array<char, 64> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", v);
    return buf.data();
}

void print(const Ast& a, std::string& out) {
    auto operand = [&out](const Ast& child) {
        if (needs_parens_as_operand(child)) {
            out += '(';
            print(child, out);
            out += ')';
        } else {
            print(child, out);
        }
    };
    switch (a.kind) {
        case NodeKind::constant:
            out += format_number(a.value);
            return;
        case NodeKind::variable:
            out += a.name;
            return;
        case NodeKind::neg:
            out += '-';
            operand(a.children[0]);
            return;
        case NodeKind::abs:
        case NodeKind::ln:
        case NodeKind::exp:
        case NodeKind::sqrt:
            out += function_name(a.kind);
            out += '(';
            print(a.children[0], out);
            out += ')';
            return;
        case NodeKind::add:
        case NodeKind::sub:
        case NodeKind::mul:
        case NodeKind::div:
        case NodeKind::pow: {
            static constexpr std::array<char, 5> ops{'+', '-', '*', '/', '^'};
            const auto idx = static_cast<std::size_t>(a.kind) - static_cast<std::size_t>(NodeKind::add);
            operand(a.children[0]);
            out += ops[idx];
            operand(a.children[1]);
            return;
        }
    }
}

bool is_integer(double v) { return std::isfinite(v) && std::floor(v) == v; }

// Returns NaN on a domain violation. Shared by both evaluators.
double apply_unary(NodeKind kind, double x, const char*& reason) {
    switch (kind) {
        case NodeKind::neg: return -x;
        case NodeKind::abs: return std::fabs(x);
        case NodeKind::exp: return std::exp(x);
        case NodeKind::ln:
            if (!(x > 0.0)) {
                reason = "logarithm of a non-positive number";
                return kNaN;
            }
            return std::log(x);
        case NodeKind::sqrt:
            if (!(x >= 0.0)) {
                reason = "square root of a negative number";
                return kNaN;
            }
            return std::sqrt(x);
        default: return kNaN;
    }
}

double apply_binary(NodeKind kind, double a, double b, const char*& reason) {
    switch (kind) {
        case NodeKind::add: return a + b;
        case NodeKind::sub: return a - b;
        case NodeKind::mul: return a * b;
        case NodeKind::div:
            if (b == 0.0) {
                reason = "division by zero";
                return kNaN;
            }
            return a / b;
        case NodeKind::pow:
            if (a < 0.0 && !is_integer(b)) {
                reason = "negative base with non-integer exponent";
                return kNaN;
            }
            if (a == 0.0 && b < 0.0) {
                reason = "division by zero";
                return kNaN;
            }
            return std::pow(a, b);
        default: return kNaN;
    }
}

}  // namespace

int arity(NodeKind kind) noexcept {
    switch (kind) {
        case NodeKind::constant:
        case NodeKind::variable: return 0;
        case NodeKind::neg:
        case NodeKind::abs:
        case NodeKind::ln:
        case NodeKind::exp:
        case NodeKind::sqrt: return 1;
        default: return 2;
    }
}

Ast Ast::constant(double v) {
    Ast a;
    a.kind = NodeKind::constant;
    a.value = v;
    return a;
}

Ast Ast::variable(std::string name, std::size_t slot) {
    Ast a;
    a.kind = NodeKind::variable;
    a.name = std::move(name);
    a.slot = slot;
    return a;
}

Ast Ast::unary(NodeKind kind, Ast child) {
    Ast a;
    a.kind = kind;
    a.children.push_back(std::move(child));
    return a;
}

Ast Ast::binary(NodeKind kind, Ast lhs, Ast rhs) {
    Ast a;
    a.kind = kind;
    a.children.reserve(2);
    a.children.push_back(std::move(lhs));
    a.children.push_back(std::move(rhs));
    return a;
}

Ast parse(std::string_view text, std::span<const std::string> variables) {
    return Parser(text, variables).parse_all();
}

Ast parse(std::string_view text) {
    static const std::array<std::string, 1> kU{"u"};
    return parse(text, kU);
}

std::string to_string(const Ast& ast) {
    std::string out;
    print(ast, out);
    return out;
}

double evaluate(const Ast& a, std::span<const double> point) noexcept {
    const char* reason = nullptr;
    switch (arity(a.kind)) {
        case 0:
            return a.kind == NodeKind::constant ? a.value
                                                : (a.slot < point.size() ? point[a.slot] : kNaN);
        case 1: return apply_unary(a.kind, evaluate(a.children[0], point), reason);
        default:
            return apply_binary(a.kind, evaluate(a.children[0], point), evaluate(a.children[1], point),
                                reason);
    }
}

Evaluation evaluate_checked(const Ast& a, std::span<const double> point) {
    const char* reason = nullptr;
    double value = 0.0;
    switch (arity(a.kind)) {
        case 0:
            if (a.kind == NodeKind::constant) return {a.value, {}};
            if (a.slot >= point.size()) return {kNaN, DomainError{a.name, "unbound variable"}};
            return {point[a.slot], {}};
        case 1: {
            Evaluation x = evaluate_checked(a.children[0], point);
            if (!x.ok()) return x;
            value = apply_unary(a.kind, x.value, reason);
            break;
        }
        default: {
            Evaluation lhs = evaluate_checked(a.children[0], point);
            if (!lhs.ok()) return lhs;
            Evaluation rhs = evaluate_checked(a.children[1], point);
            if (!rhs.ok()) return rhs;
            value = apply_binary(a.kind, lhs.value, rhs.value, reason);
            break;
        }
    }
    if (reason != nullptr) return {value, DomainError{to_string(a), reason}};
    return {value, {}};
}

void validate(const Ast& ast, std::size_t variable_count) {
    if (ast.children.size() != static_cast<std::size_t>(arity(ast.kind))) {
        throw PreconditionError("malformed expression tree: arity mismatch");
    }
    if (ast.kind == NodeKind::variable && ast.slot >= variable_count) {
        throw PreconditionError("expression refers to undeclared variable '" + ast.name + "'");
    }
    for (const auto& c : ast.children) validate(c, variable_count);
}

}  // namespace fiberdyn::expr
