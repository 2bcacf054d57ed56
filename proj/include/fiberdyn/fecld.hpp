#pragma once

// Envelope certificate for convergence in the basin of a fiber {u = u*} with
// |f1(u*)| = 1: envelopes W, V bounding |f0(u) - f0(u*)| and |f1(u) - f1(u*)|
// in terms of |u - u*|, a decay sequence p_n dominating |u_n - u*|, and the
// summability of W(p_n), V(p_n).

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fiberdyn/core.hpp"
#include "fiberdyn/parallel.hpp"

namespace fiberdyn::fecld {

/// coefficient * nu^exponent
struct PowerTerm {
    double coefficient = 0.0;
    double exponent = 1.0;
};

/// A nonnegative function of nu = |u - u*| on [0, epsilon). Either a sum of
/// power terms (closed-form series tails available) or an arbitrary function.
class Envelope {
public:
    static Envelope zero() { return Envelope{}; }
    static Envelope power(double coefficient, double exponent);
    static Envelope sum(std::vector<PowerTerm> terms);
    static Envelope function(ScalarFn f);

    double operator()(double nu) const;
    bool closed_form() const noexcept { return !fn_.has_value(); }
    const std::vector<PowerTerm>& terms() const noexcept { return terms_; }
    bool is_zero() const noexcept;
    std::string describe() const;

    /// Closed-form supremum on [0, epsilon); nullopt for general functions.
    std::optional<double> sup_closed_form(double epsilon) const;

    friend Envelope operator*(double scale, const Envelope& e);
    friend Envelope operator+(const Envelope& a, const Envelope& b);

private:
    std::vector<PowerTerm> terms_;
    std::optional<ScalarFn> fn_;
};

/// Nonincreasing sequence p_n -> 0.
///   geometric:  p_n = scale * ratio^n
///   power law:  p_n = scale * (stride * n + offset)^(-exponent), base clamped below at 1
///   table:      user-supplied values
class DecaySequence {
public:
    struct Geometric {
        double scale;
        double ratio;
    };
    struct PowerLaw {
        double scale;
        double exponent;
        double stride = 1.0;
        double offset = 0.0;
    };
    struct Table {
        std::vector<double> values;
    };

    static DecaySequence geometric(double scale, double ratio);
    static DecaySequence power_law(double scale, double exponent);
    static DecaySequence table(std::vector<double> values);

    double operator[](std::size_t n) const;
    bool closed_form() const noexcept { return !std::holds_alternative<Table>(kind_); }
    /// Number of available terms (unbounded for closed forms).
    std::size_t size() const noexcept;

    /// Upper bound on sum_{j >= n} p_j^e; +inf when divergent. nullopt for tables.
    std::optional<double> power_tail(double e, std::size_t n) const;

    /// q_n = p_{n + k}.
    DecaySequence shifted(std::size_t k) const;
    /// q_n = p_{2n}; the sequence seen by the two-step system.
    DecaySequence every_other() const;
    /// Re-anchors so that q_0 >= value with the fastest admissible decay:
    /// geometric sequences are rescaled, the others shifted.
    DecaySequence anchored_to(double value) const;

    std::string describe() const;
    const auto& kind() const noexcept { return kind_; }

private:
    explicit DecaySequence(std::variant<Geometric, PowerLaw, Table> k) : kind_(std::move(k)) {}
    std::variant<Geometric, PowerLaw, Table> kind_;
};

struct EnvelopeSpec {
    Envelope V;
    Envelope W;
    double epsilon = 0.0;
    DecaySequence p = DecaySequence::geometric(0.0, 0.0);

    bool closed_form_tails() const noexcept { return V.closed_form() && W.closed_form() && p.closed_form(); }
    /// Closed-form series tails sum_{j>=n} V(p_j), W(p_j); nullopt without closed forms.
    std::optional<double> tail_V(std::size_t n) const;
    std::optional<double> tail_W(std::size_t n) const;
};

enum class CheckStatus { pass, fail, evidence_only };
enum class Verdict { certified_by_closed_form, numerically_supported, inconclusive, refuted };

std::string to_string(CheckStatus s);
std::string to_string(Verdict v);

/// A concrete violation: at distance nu from u*, lhs > rhs.
struct Witness {
    double nu = 0.0;
    double u = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
};

struct Check {
    CheckStatus status = CheckStatus::pass;
    std::string detail;
    std::optional<Witness> witness;
};

struct FecldCertificate {
    EnvelopeSpec envelope;
    double u_star = 0.0;
    Check h1, h2, h3, h4;
    double S_V = 0.0;
    double S_W = 0.0;
    double V_bar = 0.0;
    double W_bar = 0.0;
    bool divergence_suspected = false;
    Verdict verdict = Verdict::refuted;
};

struct CertificateOptions {
    std::size_t samples = 256;
    std::size_t partial_terms = 1'000'000;  // table-based p_n
    double tol_h = defaults::tol_h;
    ParallelOptions parallel;
};

/// Samples H1-H3 on a log grid of nu in [epsilon * 1e-12, epsilon) on both
/// sides of u* and evaluates H4 from closed-form tails when available.
/// Throws PreconditionError unless |f1(u*)| = 1 within tol_h.
FecldCertificate check_certificate(const TriangularMap& map, double u_star, const EnvelopeSpec& env,
                                   const CertificateOptions& options = {});

/// Re-evaluates the H1 (f0) or H2 (f1) inequality at a witness; true when the
/// violation reproduces.
bool witness_reproduces(const TriangularMap& map, double u_star, const EnvelopeSpec& env, int hypothesis,
                        const Witness& w);

class NotHyperbolicError : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

/// W(nu) = A nu, V(nu) = B nu with A, B the sampled suprema of |f0'|, |f1'| on
/// the window, and p_n = epsilon * mu^n with mu the sampled supremum of |phi'|.
EnvelopeSpec hyperbolic_envelope(const TriangularMap& map, double u_star, double epsilon,
                                 std::size_t samples = 4097, double tol_h = defaults::tol_h);

/// Envelope for the two-step system (F0, F1, phi o phi) derived from one for
/// the original map: W' = A W + B V, V' = (1 + C) V, p'_n = p_{2n}, with
/// A = 1 + sup|f1(phi(v))|, B = |f0(u*)|, C = sup|f1(v)| on the window.
EnvelopeSpec two_step_envelope(const TriangularMap& map, double u_star, const EnvelopeSpec& env,
                               std::size_t samples = 4097);

/// sum_{j >= n} W(p_j) + R sum_{j >= n} V(p_j), a bound on |x_{n+m} - x_n| for
/// every m, given |x_j| <= R. Throws PreconditionError for refuted
/// certificates or without closed-form tails.
double cauchy_tail_bound(const FecldCertificate& cert, double R, std::size_t n);

nlohmann::json to_json(const FecldCertificate& cert);

}  // namespace fiberdyn::fecld
