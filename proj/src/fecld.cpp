#include "fiberdyn/fecld.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fiberdyn::fecld {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

// Log-spaced distances in [epsilon * 1e-12, epsilon).
std::vector<double> log_grid(double epsilon, std::size_t samples) {
    std::vector<double> nu(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(samples);
        nu[i] = epsilon * std::pow(10.0, -12.0 * (1.0 - t));
    }
    return nu;
}

// Points u* + epsilon * t, t uniform on [-1, 1]. Interior NaN is an error;
// NaN at the two endpoints (open window) is skipped.
double sampled_sup(const std::function<double(double)>& g, double u_star, double epsilon, std::size_t samples,
                   const char* what) {
    double sup = 0.0;
    const std::size_t n = std::max<std::size_t>(samples, 3);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
        const double v = std::fabs(g(u_star + epsilon * t));
        if (std::isnan(v)) {
            if (i == 0 || i == n - 1) continue;
            throw PreconditionError(std::string(what) + " is undefined at u = " + fmt(u_star + epsilon * t));
        }
        sup = std::max(sup, v);
    }
    return sup;
}

double envelope_sup(const Envelope& e, double epsilon, std::span<const double> grid) {
    if (auto s = e.sup_closed_form(epsilon)) return *s;
    double sup = 0.0;
    for (double nu : grid) sup = std::max(sup, e(nu));
    return sup;
}

}  // namespace

// ---------------------------------------------------------------- Envelope

Envelope Envelope::power(double coefficient, double exponent) { return sum({{coefficient, exponent}}); }

Envelope Envelope::sum(std::vector<PowerTerm> terms) {
    Envelope e;
    for (const auto& t : terms) {
        if (t.coefficient == 0.0) continue;
        auto same = std::find_if(e.terms_.begin(), e.terms_.end(),
                                 [&](const PowerTerm& o) { return o.exponent == t.exponent; });
        if (same != e.terms_.end()) {
            same->coefficient += t.coefficient;
        } else {
            e.terms_.push_back(t);
        }
    }
    return e;
}

Envelope Envelope::function(ScalarFn f) {
    Envelope e;
    e.fn_ = std::move(f);
    return e;
}

double Envelope::operator()(double nu) const {
    if (fn_) return (*fn_)(nu);
    double s = 0.0;
    for (const auto& t : terms_) s += t.coefficient * std::pow(nu, t.exponent);
    return s;
}

bool Envelope::is_zero() const noexcept {
    if (fn_) return fn_->constant_value() == 0.0;
    return terms_.empty();
}

std::string Envelope::describe() const {
    if (fn_) return fn_->name();
    if (terms_.empty()) return "0";
    std::string s;
    for (const auto& t : terms_) {
        if (!s.empty()) s += " + ";
        s += fmt(t.coefficient) + "*nu^" + fmt(t.exponent);
    }
    return s;
}

std::optional<double> Envelope::sup_closed_form(double epsilon) const {
    if (fn_) return std::nullopt;
    const bool monotone = std::all_of(terms_.begin(), terms_.end(), [](const PowerTerm& t) {
        return t.coefficient >= 0.0 && t.exponent >= 0.0;
    });
    if (!monotone) return std::nullopt;
    return (*this)(epsilon);
}

Envelope operator*(double scale, const Envelope& e) {
    if (e.fn_) {
        if (scale == 0.0) return Envelope::zero();
        return Envelope::function(ScalarFn::constant(scale) * *e.fn_);
    }
    std::vector<PowerTerm> terms = e.terms_;
    for (auto& t : terms) t.coefficient *= scale;
    return Envelope::sum(std::move(terms));
}

Envelope operator+(const Envelope& a, const Envelope& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (a.fn_ || b.fn_) {
        const auto as_fn = [](const Envelope& e) {
            return e.fn_ ? *e.fn_ : ScalarFn::builtin(e.describe(), [e](double nu) { return e(nu); });
        };
        return Envelope::function(as_fn(a) + as_fn(b));
    }
    std::vector<PowerTerm> terms = a.terms_;
    terms.insert(terms.end(), b.terms_.begin(), b.terms_.end());
    return Envelope::sum(std::move(terms));
}

// ----------------------------------------------------------- DecaySequence

DecaySequence DecaySequence::geometric(double scale, double ratio) {
    if (!(scale >= 0.0) || !(ratio >= 0.0)) throw PreconditionError("geometric decay needs scale, ratio >= 0");
    return DecaySequence(Geometric{scale, ratio});
}

DecaySequence DecaySequence::power_law(double scale, double exponent) {
    if (!(scale >= 0.0) || !(exponent > 0.0)) throw PreconditionError("power-law decay needs scale >= 0, r > 0");
    return DecaySequence(PowerLaw{scale, exponent});
}

DecaySequence DecaySequence::table(std::vector<double> values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] >= 0.0) || (i > 0 && values[i] > values[i - 1])) {
            throw PreconditionError("decay table must be nonnegative and nonincreasing (index " +
                                    std::to_string(i) + ")");
        }
    }
    return DecaySequence(Table{std::move(values)});
}

double DecaySequence::operator[](std::size_t n) const {
    return std::visit(Overloaded{
                          [n](const Geometric& g) { return g.scale * std::pow(g.ratio, static_cast<double>(n)); },
                          [n](const PowerLaw& p) {
                              const double base = std::max(1.0, p.stride * static_cast<double>(n) + p.offset);
                              return p.scale * std::pow(base, -p.exponent);
                          },
                          [n](const Table& t) { return t.values.at(n); },
                      },
                      kind_);
}

std::size_t DecaySequence::size() const noexcept {
    if (const auto* t = std::get_if<Table>(&kind_)) return t->values.size();
    return std::numeric_limits<std::size_t>::max();
}

std::optional<double> DecaySequence::power_tail(double e, std::size_t n) const {
    const double dn = static_cast<double>(n);
    return std::visit(
        Overloaded{
            [&](const Geometric& g) -> std::optional<double> {
                if (g.scale == 0.0) return 0.0;
                if (e <= 0.0) return kInf;
                const double q = std::pow(g.ratio, e);
                if (q >= 1.0) return kInf;
                return std::pow(g.scale, e) * std::pow(g.ratio, e * dn) / (1.0 - q);
            },
            [&](const PowerLaw& p) -> std::optional<double> {
                if (p.scale == 0.0) return 0.0;
                const double q = p.exponent * e;
                if (q <= 1.0) return kInf;
                // Terms with clamped base equal 1; past that, f(j0) + integral from j0.
                const double first_unclamped = std::ceil((1.0 - p.offset) / p.stride);
                const double j0 = std::max(dn, first_unclamped);
                const double clamped = j0 - dn;
                const double b0 = p.stride * j0 + p.offset;
                const double series = clamped + std::pow(b0, -q) + std::pow(b0, 1.0 - q) / (p.stride * (q - 1.0));
                return std::pow(p.scale, e) * series;
            },
            [](const Table&) -> std::optional<double> { return std::nullopt; },
        },
        kind_);
}

DecaySequence DecaySequence::shifted(std::size_t k) const {
    const double dk = static_cast<double>(k);
    return std::visit(Overloaded{
                          [&](const Geometric& g) { return geometric(g.scale * std::pow(g.ratio, dk), g.ratio); },
                          [&](const PowerLaw& p) {
                              PowerLaw q = p;
                              q.offset += p.stride * dk;
                              return DecaySequence(q);
                          },
                          [&](const Table& t) {
                              const auto skip = std::min(k, t.values.size());
                              return DecaySequence(
                                  Table{std::vector<double>(t.values.begin() + static_cast<std::ptrdiff_t>(skip),
                                                            t.values.end())});
                          },
                      },
                      kind_);
}

DecaySequence DecaySequence::every_other() const {
    return std::visit(Overloaded{
                          [](const Geometric& g) { return geometric(g.scale, g.ratio * g.ratio); },
                          [](const PowerLaw& p) {
                              PowerLaw q = p;
                              q.stride *= 2.0;
                              return DecaySequence(q);
                          },
                          [](const Table& t) {
                              std::vector<double> even;
                              for (std::size_t i = 0; i < t.values.size(); i += 2) even.push_back(t.values[i]);
                              return DecaySequence(Table{std::move(even)});
                          },
                      },
                      kind_);
}

DecaySequence DecaySequence::anchored_to(double value) const {
    if (!(value > 0.0)) return *this;
    return std::visit(Overloaded{
                          [&](const Geometric& g) { return geometric(value, g.ratio); },
                          [&](const PowerLaw& p) {
                              if (p.scale < value) return DecaySequence(p);
                              const double base = std::pow(p.scale / value, 1.0 / p.exponent);
                              double m = std::max(0.0, std::floor((base - p.offset) / p.stride));
                              PowerLaw q = p;
                              q.offset = p.offset + p.stride * m;
                              while (m > 0.0 && DecaySequence(q)[0] < value) {
                                  m -= 1.0;
                                  q.offset = p.offset + p.stride * m;
                              }
                              return DecaySequence(q);
                          },
                          [&](const Table& t) {
                              std::size_t m = 0;
                              while (m + 1 < t.values.size() && t.values[m + 1] >= value) ++m;
                              return shifted(m);
                          },
                      },
                      kind_);
}

std::string DecaySequence::describe() const {
    return std::visit(Overloaded{
                          [](const Geometric& g) { return "geometric(c=" + fmt(g.scale) + ", mu=" + fmt(g.ratio) + ")"; },
                          [](const PowerLaw& p) {
                              return "power-law(c=" + fmt(p.scale) + ", r=" + fmt(p.exponent) +
                                     ", stride=" + fmt(p.stride) + ", offset=" + fmt(p.offset) + ")";
                          },
                          [](const Table& t) { return "table(" + std::to_string(t.values.size()) + " terms)"; },
                      },
                      kind_);
}

// ------------------------------------------------------------ EnvelopeSpec

namespace {

std::optional<double> envelope_tail(const Envelope& e, const DecaySequence& p, std::size_t n) {
    if (!e.closed_form() || !p.closed_form()) return std::nullopt;
    double total = 0.0;
    for (const auto& t : e.terms()) {
        const double tail = *p.power_tail(t.exponent, n);
        if (tail == 0.0) continue;
        total += t.coefficient * tail;
    }
    return total;
}

}  // namespace

std::optional<double> EnvelopeSpec::tail_V(std::size_t n) const { return envelope_tail(V, p, n); }
std::optional<double> EnvelopeSpec::tail_W(std::size_t n) const { return envelope_tail(W, p, n); }

std::string to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::pass: return "pass";
        case CheckStatus::fail: return "fail";
        case CheckStatus::evidence_only: return "evidence-only";
    }
    return "unknown";
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::certified_by_closed_form: return "certified-by-closed-form";
        case Verdict::numerically_supported: return "numerically-supported";
        case Verdict::inconclusive: return "inconclusive";
        case Verdict::refuted: return "refuted";
    }
    return "unknown";
}

// ------------------------------------------------------- check_certificate

namespace {

struct Inequality {
    double lhs;
    double rhs;
    double slack;
    bool violated() const { return !(lhs <= rhs + slack); }
};

Inequality envelope_inequality(const ScalarFn& f, double at_star, const Envelope& env, double u, double nu) {
    const double fu = f(u);
    const double lhs = std::fabs(fu - at_star);
    const double rhs = env(nu);
    const double slack = 4.0 * kEps * (std::fabs(fu) + std::fabs(at_star)) + 4.0 * kEps * std::fabs(rhs);
    return {lhs, rhs, slack};
}

Check sampled_check(const ScalarFn& f, double u_star, const Envelope& env, std::span<const double> grid,
                    const ParallelOptions& parallel, const char* label) {
    Check check;
    const double at_star = f(u_star);
    const std::size_t n = 2 * grid.size();
    const auto point = [&](std::size_t i) {
        const double nu = grid[i / 2];
        return std::pair{nu, (i % 2 == 0) ? u_star - nu : u_star + nu};
    };
    const auto flags = tabulate(
        n,
        [&](std::size_t i) {
            const auto [nu, u] = point(i);
            return envelope_inequality(f, at_star, env, u, nu).violated() ? 1.0 : 0.0;
        },
        parallel);

    const double zero_value = env(0.0);
    if (!(zero_value >= 0.0) || (std::string(label) == "H2" && zero_value != 0.0)) {
        check.status = CheckStatus::fail;
        check.detail = std::string(label) + ": envelope at 0 is " + fmt(zero_value);
        check.witness = Witness{0.0, u_star, zero_value, 0.0};
        return check;
    }
    const auto hit = std::find(flags.begin(), flags.end(), 1.0);
    if (hit == flags.end()) {
        check.detail = std::to_string(n) + " samples satisfy the envelope";
        return check;
    }
    const auto [nu, u] = point(static_cast<std::size_t>(hit - flags.begin()));
    const auto ineq = envelope_inequality(f, at_star, env, u, nu);
    check.status = CheckStatus::fail;
    check.detail = std::string(label) + " violated at u = " + fmt(u) + ": " + fmt(ineq.lhs) + " > " + fmt(ineq.rhs);
    check.witness = Witness{nu, u, ineq.lhs, ineq.rhs};
    return check;
}

Check monotonicity_check(const EnvelopeSpec& env, std::span<const double> grid) {
    Check check;
    std::vector<double> nus{0.0};
    nus.insert(nus.end(), grid.begin(), grid.end());
    for (const auto* e : {&env.V, &env.W}) {
        double prev = (*e)(0.0);
        for (std::size_t i = 0; i < nus.size(); ++i) {
            const double v = (*e)(nus[i]);
            const bool negative = !(v >= 0.0);
            const bool decreasing = i > 0 && v < prev - 4.0 * kEps * std::fabs(prev);
            if (negative || decreasing) {
                check.status = CheckStatus::fail;
                check.detail = std::string(e == &env.V ? "V" : "W") +
                               (negative ? " is negative" : " decreases") + " at nu = " + fmt(nus[i]);
                check.witness = Witness{nus[i], env.epsilon, v, negative ? 0.0 : prev};
                return check;
            }
            prev = v;
        }
    }
    check.detail = "V and W nonnegative and nondecreasing on the grid";
    return check;
}

struct PartialSums {
    double value;
    bool divergence_suspected;
    std::size_t terms;
};

// Partial sum of e(p_j) over j < N with a dyadic block-ratio divergence test.
PartialSums evidence_sum(const Envelope& e, const DecaySequence& p, std::size_t terms,
                         const ParallelOptions& parallel) {
    std::size_t N = std::min(terms, p.size());
    // Terms past the point where p_j underflows to zero carry no information.
    {
        std::size_t lo = 0, hi = N;
        if (N > 0 && p[N - 1] == 0.0) {
            while (lo < hi) {
                const std::size_t mid = lo + (hi - lo) / 2;
                if (p[mid] == 0.0) {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            N = lo;
        }
    }
    const auto values = tabulate(N, [&](std::size_t j) { return e(p[j]); }, parallel);
    PartialSums out{pairwise_sum(values), false, N};
    if (std::isnan(out.value)) {
        out.value = kInf;
        return out;
    }
    std::vector<double> blocks;
    for (std::size_t lo = 1; 2 * lo <= N; lo *= 2) {
        blocks.push_back(pairwise_sum(std::span<const double>(values).subspan(lo, lo)));
    }
    if (blocks.size() >= 4) {
        const double last = blocks.back();
        const double before = blocks[blocks.size() - 2];
        out.divergence_suspected = before > 0.0 && last / before >= 0.9;
    }
    return out;
}

}  // namespace

FecldCertificate check_certificate(const TriangularMap& map, double u_star, const EnvelopeSpec& env,
                                   const CertificateOptions& options) {
    const double f1_star = map.f1(u_star);
    if (!(std::fabs(std::fabs(f1_star) - 1.0) <= options.tol_h)) {
        throw PreconditionError("certificate needs |f1(u*)| = 1; got f1(u*) = " + fmt(f1_star));
    }
    if (options.samples < 64) throw PreconditionError("certificate needs at least 64 samples");
    if (!(env.epsilon > 0.0)) throw PreconditionError("envelope epsilon must be positive");

    FecldCertificate cert;
    cert.envelope = env;
    cert.u_star = u_star;
    const auto grid = log_grid(env.epsilon, options.samples);

    cert.h1 = sampled_check(map.f0, u_star, env.W, grid, options.parallel, "H1");
    cert.h2 = sampled_check(map.f1, u_star, env.V, grid, options.parallel, "H2");
    cert.h3 = monotonicity_check(env, grid);
    cert.V_bar = envelope_sup(env.V, env.epsilon, grid);
    cert.W_bar = envelope_sup(env.W, env.epsilon, grid);

    if (env.p.closed_form() && env.p[0] > env.epsilon) {
        cert.h4.status = CheckStatus::fail;
        cert.h4.detail = "p_0 = " + fmt(env.p[0]) + " exceeds epsilon";
        cert.h4.witness = Witness{env.p[0], u_star, env.p[0], env.epsilon};
    } else if (env.closed_form_tails()) {
        cert.S_V = *env.tail_V(0);
        cert.S_W = *env.tail_W(0);
        if (std::isfinite(cert.S_V) && std::isfinite(cert.S_W)) {
            cert.h4.detail = "closed-form tails";
        } else {
            // Witness: the first divergent term. For a p-series the violated
            // inequality is exponent > 1, for a geometric series ratio < 1.
            cert.h4.status = CheckStatus::fail;
            for (const auto* e : {&env.V, &env.W}) {
                const std::string sum_name = e == &env.V ? "S_V" : "S_W";
                for (const auto& t : e->terms()) {
                    if (std::isfinite(*env.p.power_tail(t.exponent, 0))) continue;
                    if (const auto* pl = std::get_if<DecaySequence::PowerLaw>(&env.p.kind())) {
                        const double q = t.exponent * pl->exponent;
                        cert.h4.detail = sum_name + " diverges: p-series exponent " + fmt(q) + " <= 1";
                        cert.h4.witness = Witness{q, u_star, 1.0, q};
                    } else {
                        const auto& g = std::get<DecaySequence::Geometric>(env.p.kind());
                        const double q = std::pow(g.ratio, t.exponent);
                        cert.h4.detail = sum_name + " diverges: geometric ratio " + fmt(q) + " >= 1";
                        cert.h4.witness = Witness{q, u_star, q, 1.0};
                    }
                    break;
                }
                if (cert.h4.witness) break;
            }
        }
    } else {
        const auto sv = evidence_sum(env.V, env.p, options.partial_terms, options.parallel);
        const auto sw = evidence_sum(env.W, env.p, options.partial_terms, options.parallel);
        cert.S_V = sv.value;
        cert.S_W = sw.value;
        cert.divergence_suspected = sv.divergence_suspected || sw.divergence_suspected;
        cert.h4.status = CheckStatus::evidence_only;
        cert.h4.detail = "partial sums over " + std::to_string(std::max(sv.terms, sw.terms)) +
                         " terms" + (cert.divergence_suspected ? "; dyadic block sums do not decay" : "");
    }

    const bool failed = cert.h1.status == CheckStatus::fail || cert.h2.status == CheckStatus::fail ||
                        cert.h3.status == CheckStatus::fail || cert.h4.status == CheckStatus::fail;
    if (failed) {
        cert.verdict = Verdict::refuted;
    } else if (cert.h4.status == CheckStatus::pass) {
        cert.verdict = Verdict::certified_by_closed_form;
    } else if (cert.divergence_suspected || !std::isfinite(cert.S_V) || !std::isfinite(cert.S_W)) {
        cert.verdict = Verdict::inconclusive;
    } else {
        cert.verdict = Verdict::numerically_supported;
    }
    return cert;
}

bool witness_reproduces(const TriangularMap& map, double u_star, const EnvelopeSpec& env, int hypothesis,
                        const Witness& w) {
    const ScalarFn& f = hypothesis == 1 ? map.f0 : map.f1;
    const Envelope& e = hypothesis == 1 ? env.W : env.V;
    return envelope_inequality(f, f(u_star), e, w.u, w.nu).violated();
}

// ---------------------------------------------------- envelope constructors

EnvelopeSpec hyperbolic_envelope(const TriangularMap& map, double u_star, double epsilon, std::size_t samples,
                                 double tol_h) {
    if (!(epsilon > 0.0)) throw PreconditionError("epsilon must be positive");
    const auto slope = [](const ScalarFn& f) { return [&f](double u) { return numeric_derivative(f, u); }; };
    const double mu = sampled_sup(slope(map.phi), u_star, epsilon, samples, "phi'");
    if (mu >= 1.0 - tol_h) {
        throw NotHyperbolicError("sup |phi'| = " + fmt(mu) + " on the window; not a hyperbolic attractor");
    }
    const double A = sampled_sup(slope(map.f0), u_star, epsilon, samples, "f0'");
    const double B = sampled_sup(slope(map.f1), u_star, epsilon, samples, "f1'");
    return EnvelopeSpec{Envelope::power(B, 1.0), Envelope::power(A, 1.0), epsilon,
                        DecaySequence::geometric(epsilon, mu)};
}

EnvelopeSpec two_step_envelope(const TriangularMap& map, double u_star, const EnvelopeSpec& env,
                               std::size_t samples) {
    const double f1_phi = sampled_sup([&](double v) { return map.f1(map.phi(v)); }, u_star, env.epsilon, samples,
                                      "f1(phi)");
    const double f1_sup = sampled_sup([&](double v) { return map.f1(v); }, u_star, env.epsilon, samples, "f1");
    const double A = 1.0 + f1_phi;
    const double B = std::fabs(map.f0(u_star));
    const double C = std::max(f1_sup, f1_phi);
    return EnvelopeSpec{(1.0 + C) * env.V, A * env.W + B * env.V, env.epsilon, env.p.every_other()};
}

double cauchy_tail_bound(const FecldCertificate& cert, double R, std::size_t n) {
    if (cert.verdict == Verdict::refuted) throw PreconditionError("certificate is refuted");
    const auto tw = cert.envelope.tail_W(n);
    const auto tv = cert.envelope.tail_V(n);
    if (!tw || !tv) throw PreconditionError("cauchy tail bound unavailable: tails are evidence-only");
    return *tw + (*tv == 0.0 ? 0.0 : R * *tv);
}

nlohmann::json to_json(const FecldCertificate& cert) {
    const auto check_json = [](const Check& c) {
        nlohmann::json j{{"status", to_string(c.status)}, {"detail", c.detail}};
        if (c.witness) {
            j["witness"] = {{"nu", c.witness->nu}, {"u", c.witness->u}, {"lhs", c.witness->lhs},
                            {"rhs", c.witness->rhs}};
        }
        return j;
    };
    return nlohmann::json{
        {"verdict", to_string(cert.verdict)},
        {"u_star", cert.u_star},
        {"epsilon", cert.envelope.epsilon},
        {"H1", check_json(cert.h1)},
        {"H2", check_json(cert.h2)},
        {"H3", check_json(cert.h3)},
        {"H4", check_json(cert.h4)},
        {"S_V", cert.S_V},
        {"S_W", cert.S_W},
        {"V_bar", cert.V_bar},
        {"W_bar", cert.W_bar},
        {"divergence_suspected", cert.divergence_suspected},
        {"envelope", {{"V", cert.envelope.V.describe()}, {"W", cert.envelope.W.describe()},
                      {"p", cert.envelope.p.describe()}}},
    };
}

}  // namespace fiberdyn::fecld
