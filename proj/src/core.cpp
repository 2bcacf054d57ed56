#include "fiberdyn/core.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace fiberdyn {

PlanarMap PlanarMap::from(const TriangularMap& m) {
    return PlanarMap{
        BivariateFn::builtin("f0(u)+f1(u)*x", [m](double x, double u) { return m.f0(u) + m.f1(u) * x; }),
        BivariateFn::builtin("phi(u)", [phi = m.phi](double, double u) { return phi(u); }),
    };
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::budget: return "budget";
        case Termination::escaped: return "escaped";
        case Termination::domain_error: return "domain-error";
        case Termination::converged: return "converged";
    }
    return "unknown";
}

std::string to_string(FixedPointClass c) {
    switch (c) {
        case FixedPointClass::hyperbolic_attractor: return "hyperbolic-attractor";
        case FixedPointClass::hyperbolic_repellor: return "hyperbolic-repellor";
        case FixedPointClass::non_hyperbolic: return "non-hyperbolic";
    }
    return "unknown";
}

std::string to_string(Contractivity c) {
    switch (c) {
        case Contractivity::yes: return "yes";
        case Contractivity::no: return "no";
        case Contractivity::inconclusive: return "inconclusive";
    }
    return "unknown";
}

void write_csv(std::ostream& out, const OrbitTrace& trace) {
    const auto old_precision = out.precision(17);
    out << "n,x,u\n";
    const std::size_t offset = trace.states.size() == trace.steps + 1 ? 0 : trace.steps;
    for (std::size_t i = 0; i < trace.states.size(); ++i) {
        out << (i + offset) << ',' << trace.states[i].x << ',' << trace.states[i].u << '\n';
    }
    out << "# reason=" << to_string(trace.reason);
    if (trace.domain_error_step) out << '(' << *trace.domain_error_step << ')';
    out << '\n';
    out.precision(old_precision);
}

FixedPointClass classify_multiplier(double multiplier, double tol_h) noexcept {
    const double m = std::fabs(multiplier);
    if (m < 1.0 - tol_h) return FixedPointClass::hyperbolic_attractor;
    if (m > 1.0 + tol_h) return FixedPointClass::hyperbolic_repellor;
    return FixedPointClass::non_hyperbolic;
}

std::vector<FixedPointInfo> find_fixed_points(const ScalarFn& phi, double lo, double hi,
                                              const FixedPointOptions& options) {
    const auto g = [&phi](double u) { return phi(u) - u; };
    std::vector<FixedPointInfo> result;
    for (double root : find_roots(g, lo, hi, options.scan)) {
        FixedPointInfo info;
        info.location = root;
        info.multiplier = numeric_derivative(phi, root);
        info.kind = classify_multiplier(info.multiplier, options.tol_h);
        try {
            info.contractive = is_locally_contractive(phi, root, options.contract_radius,
                                                      options.contract_samples, options.tol_h);
        } catch (const DomainErrorException&) {
            info.contractive = Contractivity::inconclusive;
        }
        result.push_back(info);
    }
    return result;
}

TwoCycleSearch find_two_cycles(const ScalarFn& phi, double lo, double hi, const RootScanOptions& options) {
    const auto g2 = [&phi](double u) { return phi(phi(u)) - u; };
    TwoCycleSearch search;

    std::size_t valid = 0;
    std::size_t periodic = 0;
    const std::size_t n = std::max<std::size_t>(options.grid, 2);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        const double r = g2(u);
        if (std::isnan(r)) continue;
        ++valid;
        if (std::fabs(r) <= 1e-9 * std::max(1.0, std::fabs(u))) ++periodic;
    }
    if (valid > 0 && 2 * periodic > n) {
        search.continuum = true;
        return search;
    }

    std::vector<double> candidates;
    for (double r : find_roots(g2, lo, hi, options)) {
        if (std::fabs(phi(r) - r) > 1e-7 * std::max(1.0, std::fabs(r))) candidates.push_back(r);
    }
    std::vector<bool> used(candidates.size(), false);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (used[i]) continue;
        const double image = phi(candidates[i]);
        for (std::size_t j = i + 1; j < candidates.size(); ++j) {
            if (used[j] || std::fabs(candidates[j] - image) > 1e-7 * std::max(1.0, std::fabs(image))) continue;
            const double q_minus = std::min(candidates[i], candidates[j]);
            const double q_plus = std::max(candidates[i], candidates[j]);
            if (std::fabs(phi(q_minus) - q_plus) < options.tol_root &&
                std::fabs(phi(q_plus) - q_minus) < options.tol_root) {
                search.cycles.emplace_back(q_minus, q_plus);
                used[i] = used[j] = true;
            }
            break;
        }
    }
    return search;
}

Contractivity is_locally_contractive(const ScalarFn& phi, double u_star, double radius, std::size_t samples,
                                     double tol_h) {
    if (!(radius > 0.0)) throw PreconditionError("is_locally_contractive: radius must be positive");
    if (samples < 16) throw PreconditionError("is_locally_contractive: at least 16 samples required");

    // Linear offsets cover the window; log offsets resolve the approach to u*.
    std::vector<double> offsets;
    offsets.reserve(2 * samples);
    for (std::size_t i = 1; i <= samples; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(samples + 1);
        offsets.push_back(radius * t);
        offsets.push_back(radius * std::pow(10.0, -4.0 * t));
    }
    std::sort(offsets.begin(), offsets.end());

    std::vector<std::pair<double, double>> graph;  // (u, phi(u)) for the orientation test
    graph.reserve(2 * offsets.size());
    bool contracts = true;
    for (double d : offsets) {
        for (double u : {u_star - d, u_star + d}) {
            const auto value = phi.evaluate(u);
            if (!value.ok()) throw DomainErrorException(*value.error);
            if (!(std::fabs(value.value - u_star) < std::fabs(u - u_star))) contracts = false;
            graph.emplace_back(u, value.value);
        }
    }
    if (!contracts) return Contractivity::no;

    const double multiplier = numeric_derivative(phi, u_star);
    if (std::fabs(multiplier) < 1.0 - tol_h) return Contractivity::yes;

    std::sort(graph.begin(), graph.end());
    const bool increasing = std::adjacent_find(graph.begin(), graph.end(), [](const auto& a, const auto& b) {
                                return !(b.second > a.second);
                            }) == graph.end();
    return increasing ? Contractivity::yes : Contractivity::inconclusive;
}

TriangularMap two_step(const TriangularMap& m) {
    const ScalarFn f0_next = compose(m.f0, m.phi);
    const ScalarFn f1_next = compose(m.f1, m.phi);
    return TriangularMap{f0_next + f1_next * m.f0, f1_next * m.f1, compose(m.phi, m.phi)};
}

}  // namespace fiberdyn
