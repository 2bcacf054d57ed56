#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fiberdyn/roots.hpp"
#include "fiberdyn/scalar_fn.hpp"

namespace fiberdyn {

/// A point of the plane. For triangular maps the coordinates are (x, u); for
/// general planar maps the second coordinate plays the role of y.
struct State {
    double x = 0.0;
    double u = 0.0;

    bool operator==(const State&) const = default;
};

/// (x, u) -> (f0(u) + f1(u) x, phi(u)). Sends the fiber {u = c} to {u = phi(c)}.
struct TriangularMap {
    ScalarFn f0;
    ScalarFn f1 = ScalarFn::constant(1.0);
    ScalarFn phi = ScalarFn::identity();

    State operator()(State s) const noexcept { return {f0(s.u) + f1(s.u) * s.x, phi(s.u)}; }
};

/// An arbitrary planar map given by its two component functions.
struct PlanarMap {
    BivariateFn x_component;
    BivariateFn y_component;

    State operator()(State s) const noexcept { return {x_component(s.x, s.u), y_component(s.x, s.u)}; }

    static PlanarMap from(const TriangularMap& m);
};

template <class M>
concept PlaneMap = requires(const M& m, State s) {
    { m(s) } -> std::same_as<State>;
};

enum class Termination { budget, escaped, domain_error, converged };

std::string to_string(Termination t);

struct IterateOptions {
    std::size_t budget = 1000;
    double escape_radius = 1e6;
    bool record_all = true;
};

/// An orbit segment. states[0] is the start; states[k + 1] = map(states[k])
/// when every state is recorded, otherwise only the final state is kept.
struct OrbitTrace {
    State initial;
    std::vector<State> states;
    Termination reason = Termination::budget;
    std::size_t steps = 0;
    std::optional<std::size_t> domain_error_step;

    const State& last() const { return states.back(); }
};

/// Iterates until the budget is spent, |x| + |u| exceeds the escape radius,
/// a component evaluates to NaN (domain error), or a state maps to itself
/// exactly (converged).
template <PlaneMap M>
OrbitTrace iterate(const M& map, State start, const IterateOptions& options = {});

/// Writes `n,x,u` rows followed by `# reason=<...>`.
void write_csv(std::ostream& out, const OrbitTrace& trace);

enum class FixedPointClass { hyperbolic_attractor, hyperbolic_repellor, non_hyperbolic };
enum class Contractivity { yes, no, inconclusive };

std::string to_string(FixedPointClass c);
std::string to_string(Contractivity c);

FixedPointClass classify_multiplier(double multiplier, double tol_h = defaults::tol_h) noexcept;

struct FixedPointInfo {
    double location = 0.0;
    double multiplier = 0.0;
    FixedPointClass kind = FixedPointClass::non_hyperbolic;
    Contractivity contractive = Contractivity::inconclusive;
};

struct FixedPointOptions {
    RootScanOptions scan;
    double tol_h = defaults::tol_h;
    double contract_radius = 1e-3;
    std::size_t contract_samples = 64;
};

std::vector<FixedPointInfo> find_fixed_points(const ScalarFn& phi, double lo, double hi,
                                              const FixedPointOptions& options = {});

struct TwoCycleSearch {
    std::vector<std::pair<double, double>> cycles;  // (q-, q+) with q- < q+
    /// More than half the grid satisfies phi(phi(u)) = u: every point is 2-periodic.
    bool continuum = false;
};

TwoCycleSearch find_two_cycles(const ScalarFn& phi, double lo, double hi,
                               const RootScanOptions& options = {});

/// Samples |phi(u) - u*| < |u - u*| on a punctured window around u*.
/// `no` on any violation; `yes` when all samples pass and u* is hyperbolic or
/// phi is increasing on the window; otherwise `inconclusive`. Throws
/// DomainErrorException if phi is undefined somewhere in the window.
Contractivity is_locally_contractive(const ScalarFn& phi, double u_star, double radius,
                                     std::size_t samples = 64, double tol_h = defaults::tol_h);

/// The two-step system (F0, F1, phi o phi) with F0 = f0(phi) + f1(phi) f0 and
/// F1 = f1(phi) f1, which maps (x_n, u_n) to (x_{n+2}, u_{n+2}).
TriangularMap two_step(const TriangularMap& m);

// ---------------------------------------------------------------------------

template <PlaneMap M>
OrbitTrace iterate(const M& map, State start, const IterateOptions& options) {
    OrbitTrace trace;
    trace.initial = start;
    if (options.record_all) trace.states.reserve(std::min<std::size_t>(options.budget + 1, 1u << 20));
    trace.states.push_back(start);

    State current = start;
    for (std::size_t k = 0; k < options.budget; ++k) {
        const State next = map(current);
        if (next.x != next.x || next.u != next.u) {
            trace.reason = Termination::domain_error;
            trace.domain_error_step = k;
            trace.steps = k;
            return trace;
        }
        if (options.record_all) {
            trace.states.push_back(next);
        } else {
            trace.states.back() = next;
        }
        trace.steps = k + 1;
        if (!(std::abs(next.x) + std::abs(next.u) <= options.escape_radius)) {
            trace.reason = Termination::escaped;
            return trace;
        }
        if (next == current) {
            trace.reason = Termination::converged;
            return trace;
        }
        current = next;
    }
    trace.reason = Termination::budget;
    return trace;
}

}  // namespace fiberdyn
