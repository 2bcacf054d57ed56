#include "fiberdyn/classify.hpp"

#include <cmath>
#include <sstream>

namespace fiberdyn::classify {

namespace {

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

void require_fixed_point(const TriangularMap& map, double u_star, double tol_root) {
    const double image = map.phi(u_star);
    if (!(std::fabs(image - u_star) < tol_root)) {
        throw NotAFixedPointError("u* = " + fmt(u_star) + " is not a fixed point of phi (phi(u*) = " + fmt(image) +
                                  ")");
    }
}

bool escaped(State s, double radius) { return !(std::fabs(s.x) + std::fabs(s.u) <= radius); }
bool is_nan(State s) { return s.x != s.x || s.u != s.u; }

// Orbit to the limit on a fixed-point fiber (f1(u*) = 1, f0(u*) = 0).
// `env` enables the rigorous stopping rule.
LimitReport fiber_limit(const TriangularMap& map, State start, double u_star,
                        const std::optional<fecld::EnvelopeSpec>& env, double W_bar, const LimitOptions& options) {
    LimitReport report;
    report.regime = Regime::fixed_point_fiber;
    report.u_star = u_star;

    bool rigorous = env.has_value();
    std::optional<std::size_t> entry;  // first index inside the epsilon-window
    fecld::EnvelopeSpec anchored;
    double R = 0.0;

    std::size_t anchor = 0;  // heuristic window start
    double anchor_x = start.x;

    State s = start;
    for (std::size_t n = 0;; ++n) {
        if (rigorous) {
            const double dist = std::fabs(s.u - u_star);
            if (!entry && dist < env->epsilon) {
                entry = n;
                anchored = *env;
                anchored.p = env->p.anchored_to(dist);
                const double S_V = *anchored.tail_V(0);
                const double S_W = *anchored.tail_W(0);
                const double P = std::exp(S_V);
                R = W_bar + P * S_W + P * std::fabs(s.x);
                if (!std::isfinite(R)) {
                    rigorous = false;
                    report.note = "certificate sums are not finite; ";
                }
            }
            if (rigorous && entry) {
                const std::size_t m = n - *entry;
                const double p_m = anchored.p[m];
                if (!(dist <= p_m * (1.0 + 1e-12))) {
                    rigorous = false;
                    report.note = "decay sequence does not dominate |u_n - u*| at n = " + std::to_string(n) +
                                  "; falling back to the heuristic window; ";
                } else {
                    const double bound = *anchored.tail_W(m) + (R == 0.0 ? 0.0 : R * *anchored.tail_V(m));
                    if (bound < options.tol) {
                        report.limit = s.x;
                        report.error_bound = bound;
                        report.rigorous = true;
                        report.iterations = n;
                        report.note += "certificate tail bound";
                        return report;
                    }
                }
            }
        }

        if (std::fabs(s.x - anchor_x) >= options.tol || std::fabs(s.u - u_star) > options.basin_radius) {
            anchor = n;
            anchor_x = s.x;
        } else if (n - anchor >= options.window && !rigorous) {
            report.limit = s.x;
            report.error_bound = options.tol;
            report.iterations = n;
            report.note += "heuristic window of " + std::to_string(options.window) + " steps (not rigorous)";
            return report;
        }

        if (n == options.budget) break;
        const State next = map(s);
        if (is_nan(next)) {
            report.regime = Regime::undecided;
            report.domain_error_step = n;
            report.iterations = n;
            report.note += "domain error at step " + std::to_string(n);
            return report;
        }
        if (escaped(next, options.escape_radius)) {
            report.regime = Regime::unbounded;
            report.iterations = n + 1;
            report.note += "escape radius exceeded";
            return report;
        }
        if (next == s) {
            report.limit = s.x;
            report.error_bound = 0.0;
            report.rigorous = true;
            report.iterations = n;
            report.note += "exact fixed point";
            return report;
        }
        s = next;
    }
    report.regime = Regime::undecided;
    report.iterations = options.budget;
    report.note += "budget exhausted";
    return report;
}

}  // namespace

std::string to_string(Regime r) {
    switch (r) {
        case Regime::global_attractor: return "A-global-attractor";
        case Regime::fixed_point_fiber: return "B-fixed-point-fiber";
        case Regime::two_periodic_fiber: return "C-two-periodic-fiber";
        case Regime::unbounded: return "unbounded";
        case Regime::undecided: return "undecided";
    }
    return "unknown";
}

Regime classify_regime(const TriangularMap& map, double u_star, double tol_h, double tol_root) {
    require_fixed_point(map, u_star, tol_root);
    const double f1 = map.f1(u_star);
    const double f0 = map.f0(u_star);
    if (std::fabs(f1) < 1.0 - tol_h) return Regime::global_attractor;
    if (std::fabs(f1 + 1.0) <= tol_h) return Regime::two_periodic_fiber;
    if (std::fabs(f1 - 1.0) <= tol_h) {
        return std::fabs(f0) <= tol_h ? Regime::fixed_point_fiber : Regime::unbounded;
    }
    return Regime::undecided;
}

std::optional<fecld::FecldCertificate> auto_certificate(const TriangularMap& map, double u_star, double epsilon) {
    for (int halvings = 0; halvings < 20; ++halvings, epsilon *= 0.5) {
        try {
            const auto env = fecld::hyperbolic_envelope(map, u_star, epsilon);
            auto cert = fecld::check_certificate(map, u_star, env);
            if (cert.verdict == fecld::Verdict::refuted) return std::nullopt;
            return cert;
        } catch (const fecld::NotHyperbolicError&) {
            continue;
        } catch (const PreconditionError&) {
            return std::nullopt;
        } catch (const DomainErrorException&) {
            return std::nullopt;
        }
    }
    return std::nullopt;
}

LimitReport estimate_limit(const TriangularMap& map, State start, double u_star,
                           const std::optional<fecld::FecldCertificate>& cert, const LimitOptions& options) {
    const Regime regime = classify_regime(map, u_star, options.tol_h);

    std::optional<fecld::EnvelopeSpec> env;
    double W_bar = 0.0;
    std::string cert_note;
    if (cert) {
        if (cert->verdict == fecld::Verdict::refuted) {
            cert_note = "certificate refuted, ignored; ";
        } else if (!cert->envelope.closed_form_tails()) {
            cert_note = "certificate tails are evidence-only, ignored; ";
        } else {
            env = cert->envelope;
            W_bar = cert->W_bar;
        }
    }

    switch (regime) {
        case Regime::global_attractor: {
            LimitReport report;
            report.regime = regime;
            report.u_star = u_star;
            const double ell = map.f0(u_star) / (1.0 - map.f1(u_star));
            report.limit = ell;
            State s = start;
            std::size_t n = 0;
            for (; n < options.budget; ++n) {
                if (std::fabs(s.x - ell) < options.tol && std::fabs(s.u - u_star) < options.tol) break;
                const State next = map(s);
                if (is_nan(next)) {
                    report.regime = Regime::undecided;
                    report.domain_error_step = n;
                    report.note = "domain error at step " + std::to_string(n);
                    break;
                }
                if (escaped(next, options.escape_radius)) {
                    report.regime = Regime::unbounded;
                    report.note = "escape radius exceeded";
                    ++n;
                    break;
                }
                s = next;
            }
            report.iterations = n;
            report.error_bound = std::fabs(s.x - ell);
            if (report.note.empty()) {
                report.note = report.error_bound < options.tol ? "closed-form limit f0(u*)/(1 - f1(u*)); orbit verified"
                                                              : "closed-form limit; orbit not within tol by budget";
            }
            return report;
        }
        case Regime::fixed_point_fiber: {
            auto report = fiber_limit(map, start, u_star, env, W_bar, options);
            report.note = cert_note + report.note;
            return report;
        }
        case Regime::two_periodic_fiber: {
            LimitReport report;
            report.regime = regime;
            report.u_star = u_star;
            Contractivity contractive = Contractivity::inconclusive;
            try {
                contractive = is_locally_contractive(map.phi, u_star, 1e-3, 64, options.tol_h);
            } catch (const DomainErrorException&) {
            }
            if (contractive == Contractivity::no) {
                report.regime = Regime::undecided;
                report.note = "phi is not locally contractive at u*";
                return report;
            }
            const TriangularMap reduced = two_step(map);
            std::optional<fecld::EnvelopeSpec> reduced_env;
            double reduced_W_bar = 0.0;
            if (env) {
                try {
                    reduced_env = fecld::two_step_envelope(map, u_star, *env);
                    const auto rc = fecld::check_certificate(reduced, u_star, *reduced_env);
                    if (rc.verdict == fecld::Verdict::certified_by_closed_form) {
                        reduced_W_bar = rc.W_bar;
                    } else {
                        reduced_env.reset();
                        cert_note += "two-step envelope " + fecld::to_string(rc.verdict) + ", ignored; ";
                    }
                } catch (const PreconditionError& e) {
                    reduced_env.reset();
                    cert_note += std::string("two-step envelope unavailable: ") + e.what() + "; ";
                }
            }
            const State odd_start = map(start);
            const auto even = fiber_limit(reduced, start, u_star, reduced_env, reduced_W_bar, options);
            const auto odd = fiber_limit(reduced, odd_start, u_star, reduced_env, reduced_W_bar, options);
            report.iterations = 2 * std::max(even.iterations, odd.iterations);
            report.note = cert_note + "even: " + even.note + "; odd: " + odd.note;
            if (even.regime == Regime::unbounded || odd.regime == Regime::unbounded) {
                report.regime = Regime::unbounded;
                return report;
            }
            if (!even.limit || !odd.limit) {
                report.regime = Regime::undecided;
                report.domain_error_step = even.domain_error_step ? even.domain_error_step : odd.domain_error_step;
                return report;
            }
            report.limit = even.limit;
            report.limit_even = even.limit;
            report.limit_odd = odd.limit;
            report.error_bound = std::max(even.error_bound, odd.error_bound);
            report.rigorous = even.rigorous && odd.rigorous;
            return report;
        }
        case Regime::unbounded:
        case Regime::undecided: {
            LimitReport report;
            report.regime = regime;
            report.u_star = u_star;
            const auto check = detect_unbounded(map, start, options.escape_radius, options.budget);
            report.iterations = check.steps;
            if (check.escaped) {
                report.regime = Regime::unbounded;
                report.note = "escape radius exceeded";
            } else if (check.domain_error) {
                report.regime = Regime::undecided;
                report.domain_error_step = check.steps;
                report.note = "domain error at step " + std::to_string(check.steps);
            } else {
                report.note = regime == Regime::unbounded
                                  ? "f1(u*) = 1 with f0(u*) != 0; bounded so far"
                                  : "|f1(u*)| > 1; bounded so far";
            }
            return report;
        }
    }
    return {};
}

nlohmann::json to_json(const LimitReport& r) {
    const auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    nlohmann::json j{
        {"regime", to_string(r.regime)},
        {"u_star", r.u_star},
        {"limit", opt(r.limit)},
        {"limit_even", opt(r.limit_even)},
        {"limit_odd", opt(r.limit_odd)},
        {"error_bound", r.error_bound},
        {"rigorous", r.rigorous},
        {"iterations", r.iterations},
        {"note", r.note},
    };
    j["domain_error_step"] = r.domain_error_step ? nlohmann::json(*r.domain_error_step) : nlohmann::json(nullptr);
    return j;
}

}  // namespace fiberdyn::classify
