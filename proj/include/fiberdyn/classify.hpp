#pragma once

// Limit regimes of orbits attracted to a fiber {u = u*} and limit estimation.

#include <cstddef>
#include <optional>
#include <string>

#include <json.hpp>

#include "fiberdyn/core.hpp"
#include "fiberdyn/fecld.hpp"

namespace fiberdyn::classify {

enum class Regime { global_attractor, fixed_point_fiber, two_periodic_fiber, unbounded, undecided };

/// "A-global-attractor", "B-fixed-point-fiber", "C-two-periodic-fiber", ...
std::string to_string(Regime r);

class NotAFixedPointError : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

/// A: |f1(u*)| < 1.  B: f1(u*) = 1, f0(u*) = 0.  C: f1(u*) = -1.
/// unbounded: f1(u*) = 1, f0(u*) != 0.  undecided: |f1(u*)| > 1.
Regime classify_regime(const TriangularMap& map, double u_star, double tol_h = defaults::tol_h,
                       double tol_root = defaults::tol_root);

struct LimitOptions {
    double tol = 1e-9;
    std::size_t budget = 100'000;
    double escape_radius = 1e6;
    std::size_t window = 64;     // heuristic: consecutive steps within tol
    double basin_radius = 1e-3;  // heuristic: u must stay this close to u*
    double tol_h = defaults::tol_h;
};

struct LimitReport {
    Regime regime = Regime::undecided;
    double u_star = 0.0;
    std::optional<double> limit;       // A: formula; B: estimate; C: even limit
    std::optional<double> limit_even;  // C only
    std::optional<double> limit_odd;   // C only
    double error_bound = 0.0;
    bool rigorous = false;  // error_bound comes from a certificate tail bound
    std::size_t iterations = 0;
    std::optional<std::size_t> domain_error_step;
    std::string note;
};

/// Estimates the limit of the orbit of `start`. With a non-refuted
/// certificate that has closed-form tails, iteration stops once the Cauchy
/// tail bound drops below tol (rigorous); the decay sequence is re-anchored at
/// the first entry into the epsilon-window and checked against the orbit.
/// Otherwise the heuristic window test applies. Regime C runs both parities
/// through the two-step system. Throws NotAFixedPointError.
LimitReport estimate_limit(const TriangularMap& map, State start, double u_star,
                           const std::optional<fecld::FecldCertificate>& cert = std::nullopt,
                           const LimitOptions& options = {});

/// hyperbolic_envelope + check_certificate when phi is hyperbolic at u* and
/// |f1(u*)| = 1; nullopt otherwise. The window is halved (up to 20 times)
/// until the sampled contraction rate drops below 1.
std::optional<fecld::FecldCertificate> auto_certificate(const TriangularMap& map, double u_star, double epsilon);

struct UnboundedCheck {
    bool escaped = false;
    bool domain_error = false;
    std::size_t steps = 0;
};

template <PlaneMap M>
UnboundedCheck detect_unbounded(const M& map, State start, double escape_radius = 1e6,
                                std::size_t budget = 10'000) {
    const auto trace = iterate(map, start, {budget, escape_radius, false});
    return {trace.reason == Termination::escaped, trace.reason == Termination::domain_error, trace.steps};
}

nlohmann::json to_json(const LimitReport& report);

}  // namespace fiberdyn::classify
