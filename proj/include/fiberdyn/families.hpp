#pragma once

// Constructors reducing the systems and difference equations of the theory to
// triangular maps, with closed-form oracles and predicted behaviour.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fiberdyn/core.hpp"
#include "fiberdyn/fecld.hpp"

namespace fiberdyn::families {

/// x^n by repeated multiplication (sign-exact for odd n); negative n inverts.
double ipow(double x, int n) noexcept;

// ------------------------------------------------------- power perturbation

/// x' = mu x + a u^j x^l, u' = lambda u.
struct PowerPerturbation {
    double lambda = 0.5;
    double mu = 1.0;
    double a = 1.0;
    int j = 1;
    int l = 2;
};

/// Gamma = { u^j x^(l-1) = level }, invariant with x_n = growth^n x_0.
struct InvariantCurve {
    int j = 1;
    int l = 2;
    double alpha = 0.0;  // -j / (l - 1)
    double level = 0.0;  // (lambda^alpha - mu) / a

    double defining_quantity(State s) const noexcept { return ipow(s.u, j) * ipow(s.x, l - 1); }
    /// The point of Gamma on the fiber u (the positive branch when there are two).
    State point_at(double u) const;
};

struct PowerPerturbationSystem {
    PowerPerturbation params;
    PlanarMap map;
    InvariantCurve gamma;
    double growth = 0.0;  // lambda^alpha

    /// Orbit of a point of Gamma: (growth^n x0, lambda^n u0).
    State closed_form(State start, std::size_t n) const;
};

PowerPerturbationSystem power_perturbation_map(const PowerPerturbation& p);

// --------------------------------------------------------- examples B to E

/// x' = (1 + a u) x, u' = lambda u.
TriangularMap example_b(double a, double lambda);
/// x' = f1(u) x, u' = lambda u, f1(u) = 1 - 1/ln|u| (f1(0) = 1).
TriangularMap example_c(double lambda);
/// V(nu) = 1/|ln nu|, W = 0, p_n = epsilon lambda^n: an envelope whose S_V is
/// harmonic-like. epsilon must lie in (0, 1).
fecld::EnvelopeSpec example_c_envelope(double lambda, double epsilon);
/// x' = (a + b |u|^alpha) x, u' = lambda u.
TriangularMap example_d(double a, double b, double alpha, double lambda);
/// x' = (1 + b |u|^alpha) x, u' = |u| - a |u|^k.
TriangularMap example_e(double a, double b, double alpha, double k);

// -------------------------------------------------- quasi-homogeneous maps

/// F(x, y) = (x p(x^-beta y^alpha), y q(x^-beta y^alpha)), alpha > 0 > beta.
struct QuasiHomogeneousMap {
    int alpha = 1;
    int beta = -1;
    ScalarFn p;
    ScalarFn q;
};

enum class Side { x_side, y_side };

struct QuasiHomogeneousReduction {
    QuasiHomogeneousMap source;
    Side side = Side::x_side;
    PlanarMap planar;
    ScalarFn psi;             // u p(u)^-beta q(u)^alpha
    TriangularMap triangular; // (x, u) -> (p(u) x, psi(u)), or (y, u) -> (q(u) y, psi(u))
    double p0 = 0.0;
    double q0 = 0.0;

    /// u = x^-beta y^alpha.
    double fiber(double x, double y) const noexcept;
    /// |p0| < 1, |q0| < 1 and u = 0 attracting for psi: orbits with u0 in
    /// the basin of 0 tend to the origin.
    bool origin_attracts() const noexcept;
};

QuasiHomogeneousReduction quasi_homogeneous_to_triangular(const QuasiHomogeneousMap& m, Side side = Side::x_side);

/// x' = x (4 - x y) / (6 d), y' = d y (1 + x y); psi(u) = u (4 - u)(1 + u) / 6.
struct Propoexemple {
    double d = 0.8;
    QuasiHomogeneousReduction reduction;
    std::vector<double> invariant_products;  // x y in {0, 1, 2, q-, q+}
    /// "origin attracts B0, everything else escapes" for 2/3 < |d| < 1,
    /// "every orbit with x0 y0 != 0 escapes" for |d| outside [2/3, 1].
    std::string prediction;
};

Propoexemple propoexemple_map(double d);

// ------------------------------------------------------- Moebius and Bajo-Liz

enum class MobiusCase { to_zero, to_nonzero_fixed_point, two_periodic, to_zero_parabolic };
std::string to_string(MobiusCase c);

/// phi(u) = u / (a + b u).
struct MobiusClassification {
    double a = 0.0;
    double b = 1.0;
    ScalarFn phi;
    std::vector<double> fixed_points;  // {0, (1 - a) / b}
    double pole = 0.0;                 // -a / b
    MobiusCase kind = MobiusCase::to_zero;

    /// phi^-1(w) = a w / (1 - b w); nullopt when w = 1/b.
    std::optional<double> preimage(double w) const;
    /// pole, phi^-1(pole), ...: the complement of the good set, up to depth.
    std::vector<double> excluded_points(std::size_t depth) const;
};

MobiusClassification mobius_classify(double a, double b);

enum class RecurrenceStop { budget, left_good_set, escaped };
std::string to_string(RecurrenceStop s);

struct RecurrenceTrace {
    std::vector<double> x;
    RecurrenceStop reason = RecurrenceStop::budget;
};

enum class BajoLizBehavior {
    zero_forever,
    converges_to_zero,
    two_periodic,
    tends_to_two_cycle,  // limits l0, l1 with l0 l1 = (1 - a) / b
    unbounded,
    four_periodic,
    outside_good_set,
};
std::string to_string(BajoLizBehavior b);

struct BajoLizPrediction {
    char case_letter = 'a';
    BajoLizBehavior behavior = BajoLizBehavior::zero_forever;
};

/// x_{n+2} = x_n / (a + b x_n x_{n+1}).
struct BajoLiz {
    double a = 0.5;
    double b = 1.0;

    /// Iterates to x_{count-1}; stops when a denominator vanishes.
    RecurrenceTrace iterate(double x0, double x1, std::size_t count, double escape_radius = 1e300) const;
    /// z' = z / (a + b v), v' = v / (a^2 + b (1 + a) v): (x_{2n}, u_{2n}) -> (x_{2n+2}, u_{2n+2}).
    TriangularMap reduction() const;
    /// Starts of the two parities: (x0, x0 x1) and (x1, x1 x2).
    std::vector<State> parity_starts(double x0, double x1) const;
    /// a = -1, term n: x_{2m} = x0 / (b x0 x1 - 1)^m, x_{2m+1} = x1 (b x0 x1 - 1)^m.
    static double closed_form_a_minus_one(double b, double x0, double x1, std::size_t n);
    /// a = 1: v_n = v0 / (1 + 2 b v0 n).
    static double closed_form_v_a_one(double b, double v0, std::size_t n);
    BajoLizPrediction predict(double x0, double x1) const;
};

BajoLiz bajo_liz_system(double a, double b);

// ------------------------------------------------ multiplicative order k

/// x_{n+k} = x_n g(x_n x_{n+1} ... x_{n+k-1}).
struct MultiplicativeRecurrence {
    int k = 2;
    ScalarFn g;
};

enum class ZeroFiberCase { period_2k, period_k, to_zero, unbounded, undetermined };
std::string to_string(ZeroFiberCase c);

struct MultiplicativeReduction {
    MultiplicativeRecurrence source;
    ScalarFn phi;             // v g(v)
    TriangularMap subsystem;  // z' = g(v) z, v' = phi^k(v)

    std::vector<double> raw(const std::vector<double>& initial, std::size_t count) const;
    /// (x_i, u_i) for i = 0..k-1 with u_i = x_i ... x_{i+k-1}.
    std::vector<State> subsystem_starts(const std::vector<double>& initial) const;
    /// x_0..x_{count-1} rebuilt from the k subsystem orbits.
    std::vector<double> interleave(const std::vector<double>& initial, std::size_t count) const;
    /// Behaviour on the zero-product fiber from g(0).
    ZeroFiberCase zero_fiber_case() const;
};

MultiplicativeReduction multiplicative_order_k(const MultiplicativeRecurrence& r);

// -------------------------------------------------------------- additive

/// x_{n+2} = -b x_{n+1} + g(x_{n+1} + b x_n).
struct AdditiveRecurrence {
    double b = 0.5;
    ScalarFn g;
};

enum class AdditiveBehavior { converges, two_periodic, fixed_limit, unbounded, undetermined };
std::string to_string(AdditiveBehavior b);

struct AdditiveSystem {
    AdditiveRecurrence source;
    TriangularMap map;  // f0(u) = u, f1 = -b, phi = g

    std::vector<double> raw(double x0, double x1, std::size_t count) const;
    State start(double x0, double x1) const { return {x0, x1 + source.b * x0}; }
    /// Prediction for orbits attracted to the fixed point u* of g.
    AdditiveBehavior predict(double u_star) const;
    /// u* / (1 + b) when |b| < 1.
    std::optional<double> predicted_limit(double u_star) const;
};

AdditiveSystem additive_system(const AdditiveRecurrence& r);

// ---------------------------------------------------------- examples H to K

/// x_{n+3} = x_{n+2} x_n / (x_{n+1} (a + b x_{n+2} x_n)), with v_n = x_n x_{n+2}.
struct ExampleH {
    double a = 1.0;
    double b = 0.0;
    ScalarFn phi2;            // v / (b (a + 1) v + a^2)
    PlanarMap paired;         // (y, v) -> (v / y, phi2(v)), y_n = x_{2n+i}
    TriangularMap subsystem;  // z' = z / (a^2 + b (1 + a) v), v' = phi2(phi2(v))

    std::vector<double> raw(double x0, double x1, double x2, std::size_t count) const;
};
ExampleH example_H_system(double a, double b);

/// x_{n+2} = x_n^gamma g(x_{n+1} x_n^gamma) / x_{n+1}^(gamma - 1), positive states;
/// y = ln x, u_n = x_{n+1} x_n^gamma: y' = ln u - gamma y, u' = u g(u).
struct ExampleI {
    double gamma = 1.0;
    ScalarFn g;
    TriangularMap map;

    /// (ln x0, x1 x0^gamma); PreconditionError unless x0, x1 > 0.
    State start(double x0, double x1) const;
};
ExampleI example_I_system(double gamma, const ScalarFn& g);

/// x_{n+k} = x_n + f(x_n + ... + x_{n+k-1}); subsystems z' = z + f(v), v' = phi^k(v), phi(v) = v + f(v).
struct ExampleJ {
    int k = 1;
    ScalarFn f;
    ScalarFn phi;
    TriangularMap subsystem;

    std::vector<double> raw(const std::vector<double>& initial, std::size_t count) const;
};
ExampleJ example_J_system(int k, const ScalarFn& f);

/// x_{n+2} = a x_n + (1 - a) x_{n+1} + f(x_{n+1} + a x_n); u = x_{n+1} + a x_n.
TriangularMap example_K_system(double a, const ScalarFn& f);

// --------------------------------------------------------------- registry

/// A registry family instantiated with parameters.
struct FamilyInstance {
    std::string family;
    nlohmann::json params;
    TriangularMap triangular;
    PlanarMap planar;
    /// Known attracting fixed point of the u-map, when the family fixes one.
    std::optional<double> u_star;
    /// Recurrences: initial terms -> one triangular start per subsequence.
    std::function<std::vector<State>(const std::vector<double>&)> parity_starts;
    /// Recurrences: number of initial terms the recurrence needs.
    std::size_t order = 0;
};

struct FamilyInfo {
    std::string name;
    std::string summary;
    std::string origin;
    nlohmann::json defaults;  // parameter name -> default value
};

const std::vector<FamilyInfo>& registry();

/// Instantiates `name` from a parameter object; unknown names and unknown or
/// ill-typed parameters raise PreconditionError.
FamilyInstance make_family(const std::string& name, const nlohmann::json& params = nlohmann::json::object());

}  // namespace fiberdyn::families
