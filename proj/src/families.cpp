#include "fiberdyn/families.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace fiberdyn::families {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

ScalarFn linear(double slope, const std::string& name) {
    return ScalarFn::builtin(name, [slope](double u) { return slope * u; }).with_derivative(ScalarFn::constant(slope));
}

ScalarFn zero() { return ScalarFn::constant(0.0); }

bool is_integer(double v) { return std::isfinite(v) && v == std::floor(v); }

}  // namespace

double ipow(double x, int n) noexcept {
    if (n < 0) return 1.0 / ipow(x, -n);
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
}

// ------------------------------------------------------- power perturbation

State InvariantCurve::point_at(double u) const {
    const int m = l - 1;
    const double r = level / ipow(u, j);
    if (!std::isfinite(r)) throw PreconditionError("no point of the invariant curve on the fiber u = " + fmt(u));
    if (m == 1) return {r, u};
    if (m % 2 == 0 && r < 0.0) throw PreconditionError("no real point of the invariant curve on u = " + fmt(u));
    const double magnitude = std::pow(std::fabs(r), 1.0 / m);
    return {(m % 2 != 0 && r < 0.0) ? -magnitude : magnitude, u};
}

State PowerPerturbationSystem::closed_form(State start, std::size_t n) const {
    const int k = static_cast<int>(n);
    return {ipow(growth, k) * start.x, ipow(params.lambda, k) * start.u};
}

PowerPerturbationSystem power_perturbation_map(const PowerPerturbation& p) {
    if (p.a == 0.0) throw PreconditionError("power perturbation: a = 0 is degenerate");
    if (p.l == 1) throw PreconditionError("power perturbation: l = 1 is degenerate");
    if (!(std::fabs(p.lambda) < 1.0) || p.lambda == 0.0) throw PreconditionError("power perturbation: need 0 < |lambda| < 1");
    if (!(std::fabs(p.mu) <= 1.0)) throw PreconditionError("power perturbation: need |mu| <= 1");
    if (p.j < 1 || p.l < 0) throw PreconditionError("power perturbation: need j >= 1, l >= 0");

    PowerPerturbationSystem sys;
    sys.params = p;
    const double alpha = -static_cast<double>(p.j) / static_cast<double>(p.l - 1);
    if (is_integer(alpha)) {
        sys.growth = ipow(p.lambda, static_cast<int>(alpha));
    } else {
        if (p.lambda < 0.0) throw PreconditionError("power perturbation: lambda^alpha is not real");
        sys.growth = std::pow(p.lambda, alpha);
    }
    sys.gamma = InvariantCurve{p.j, p.l, alpha, (sys.growth - p.mu) / p.a};
    sys.map = PlanarMap{
        BivariateFn::builtin("mu*x + a*u^j*x^l",
                             [p](double x, double u) { return p.mu * x + p.a * ipow(u, p.j) * ipow(x, p.l); }),
        BivariateFn::builtin("lambda*u", [lambda = p.lambda](double, double u) { return lambda * u; }),
    };
    return sys;
}

// ---------------------------------------------------------- examples B to E

TriangularMap example_b(double a, double lambda) {
    return TriangularMap{
        zero(),
        ScalarFn::builtin("1+" + fmt(a) + "*u", [a](double u) { return 1.0 + a * u; })
            .with_derivative(ScalarFn::constant(a)),
        linear(lambda, fmt(lambda) + "*u"),
    };
}

TriangularMap example_c(double lambda) {
    return TriangularMap{
        zero(),
        ScalarFn::builtin("1-1/ln|u|", [](double u) { return u == 0.0 ? 1.0 : 1.0 - 1.0 / std::log(std::fabs(u)); }),
        linear(lambda, fmt(lambda) + "*u"),
    };
}

fecld::EnvelopeSpec example_c_envelope(double lambda, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw PreconditionError("example C envelope: need 0 < epsilon < 1");
    const auto V = ScalarFn::builtin("1/|ln nu|", [](double nu) { return nu == 0.0 ? 0.0 : 1.0 / std::fabs(std::log(nu)); });
    return fecld::EnvelopeSpec{fecld::Envelope::function(V), fecld::Envelope::zero(), epsilon,
                               fecld::DecaySequence::geometric(epsilon, std::fabs(lambda))};
}

TriangularMap example_d(double a, double b, double alpha, double lambda) {
    return TriangularMap{
        zero(),
        ScalarFn::builtin(fmt(a) + "+" + fmt(b) + "*|u|^" + fmt(alpha),
                          [a, b, alpha](double u) { return a + b * std::pow(std::fabs(u), alpha); }),
        linear(lambda, fmt(lambda) + "*u"),
    };
}

TriangularMap example_e(double a, double b, double alpha, double k) {
    return TriangularMap{
        zero(),
        ScalarFn::builtin("1+" + fmt(b) + "*|u|^" + fmt(alpha),
                          [b, alpha](double u) { return 1.0 + b * std::pow(std::fabs(u), alpha); }),
        ScalarFn::builtin("|u|-" + fmt(a) + "*|u|^" + fmt(k),
                          [a, k](double u) { return std::fabs(u) - a * std::pow(std::fabs(u), k); }),
    };
}

// -------------------------------------------------- quasi-homogeneous maps

double QuasiHomogeneousReduction::fiber(double x, double y) const noexcept {
    return ipow(x, -source.beta) * ipow(y, source.alpha);
}

bool QuasiHomogeneousReduction::origin_attracts() const noexcept {
    return std::fabs(p0) < 1.0 && std::fabs(q0) < 1.0 &&
           std::fabs(ipow(p0, -source.beta) * ipow(q0, source.alpha)) < 1.0;
}

QuasiHomogeneousReduction quasi_homogeneous_to_triangular(const QuasiHomogeneousMap& m, Side side) {
    if (!(m.alpha > 0 && m.beta < 0)) throw PreconditionError("quasi-homogeneous map: need alpha > 0 > beta");
    if (std::gcd(m.alpha, -m.beta) != 1) throw PreconditionError("quasi-homogeneous map: weights must be coprime");

    QuasiHomogeneousReduction r;
    r.source = m;
    r.side = side;
    r.p0 = m.p(0.0);
    r.q0 = m.q(0.0);
    const int alpha = m.alpha;
    const int minus_beta = -m.beta;
    const ScalarFn p = m.p;
    const ScalarFn q = m.q;
    r.psi = ScalarFn::builtin("u*p(u)^" + std::to_string(minus_beta) + "*q(u)^" + std::to_string(alpha),
                              [p, q, alpha, minus_beta](double u) { return u * ipow(p(u), minus_beta) * ipow(q(u), alpha); });
    r.triangular = TriangularMap{zero(), side == Side::x_side ? p : q, r.psi};
    const auto fiber = [alpha, minus_beta](double x, double y) { return ipow(x, minus_beta) * ipow(y, alpha); };
    r.planar = PlanarMap{
        BivariateFn::builtin("x*p(u)", [p, fiber](double x, double y) { return x * p(fiber(x, y)); }),
        BivariateFn::builtin("y*q(u)", [q, fiber](double x, double y) { return y * q(fiber(x, y)); }),
    };
    return r;
}

Propoexemple propoexemple_map(double d) {
    if (d == 0.0) throw PreconditionError("propoexemple: d = 0 is not allowed");
    const double six_d = 6.0 * d;
    QuasiHomogeneousMap m{
        1, -1,
        ScalarFn::builtin("(4-u)/(6d)", [six_d](double u) { return (4.0 - u) / six_d; })
            .with_derivative(ScalarFn::constant(-1.0 / six_d)),
        ScalarFn::builtin("d*(1+u)", [d](double u) { return d * (1.0 + u); }).with_derivative(ScalarFn::constant(d)),
    };
    Propoexemple ex;
    ex.d = d;
    ex.reduction = quasi_homogeneous_to_triangular(m, Side::x_side);
    // u' = u (4 - u)(1 + u) / 6 written directly, independent of d.
    ex.reduction.psi = ScalarFn::builtin("u*(4-u)*(1+u)/6", [](double u) { return u * (4.0 - u) * (1.0 + u) / 6.0; })
                           .with_derivative(ScalarFn::builtin("(4+6u-3u^2)/6", [](double u) {
                               return (4.0 + 6.0 * u - 3.0 * u * u) / 6.0;
                           }));
    ex.reduction.triangular.phi = ex.reduction.psi;
    ex.invariant_products = {0.0, 1.0, 2.0, 1.0 - std::sqrt(13.0), 1.0 + std::sqrt(13.0)};
    const double ad = std::fabs(d);
    if (ad > 2.0 / 3.0 && ad < 1.0) {
        ex.prediction = "x0*y0 in the basin of 0 for psi: tends to (0,0); otherwise |x|+|y| tends to infinity";
    } else if (ad < 2.0 / 3.0 || ad > 1.0) {
        ex.prediction = "x0*y0 != 0: |x|+|y| tends to infinity";
    } else {
        ex.prediction = "bifurcation value |d| in {2/3, 1}: no prediction";
    }
    return ex;
}

// ------------------------------------------------------- Moebius and Bajo-Liz

std::string to_string(MobiusCase c) {
    switch (c) {
        case MobiusCase::to_zero: return "to-zero";
        case MobiusCase::to_nonzero_fixed_point: return "to-nonzero-fixed-point";
        case MobiusCase::two_periodic: return "two-periodic";
        case MobiusCase::to_zero_parabolic: return "to-zero-parabolic";
    }
    return "unknown";
}

std::optional<double> MobiusClassification::preimage(double w) const {
    const double den = 1.0 - b * w;
    if (den == 0.0) return std::nullopt;
    return a * w / den;
}

std::vector<double> MobiusClassification::excluded_points(std::size_t depth) const {
    std::vector<double> pts{pole};
    while (pts.size() <= depth) {
        const auto pre = preimage(pts.back());
        if (!pre) break;
        pts.push_back(*pre);
    }
    return pts;
}

namespace {

ScalarFn mobius(double a, double b, const std::string& name) {
    const auto f = ScalarFn::builtin(name, [a, b](double u) {
        const double den = a + b * u;
        return den == 0.0 ? kNaN : u / den;
    });
    return f.with_derivative(ScalarFn::builtin(name + "'", [a, b](double u) {
        const double den = a + b * u;
        return den == 0.0 ? kNaN : a / (den * den);
    }));
}

ScalarFn reciprocal_affine(double c0, double c1, const std::string& name) {
    return ScalarFn::builtin(name, [c0, c1](double v) {
        const double den = c0 + c1 * v;
        return den == 0.0 ? kNaN : 1.0 / den;
    });
}

}  // namespace

MobiusClassification mobius_classify(double a, double b) {
    if (b == 0.0) throw PreconditionError("moebius map: b = 0 is degenerate (linear map)");
    MobiusClassification m;
    m.a = a;
    m.b = b;
    m.phi = mobius(a, b, "u/(" + fmt(a) + "+" + fmt(b) + "*u)");
    m.fixed_points = {0.0, (1.0 - a) / b};
    m.pole = -a / b;
    if (a == -1.0) {
        m.kind = MobiusCase::two_periodic;
    } else if (a == 1.0) {
        m.kind = MobiusCase::to_zero_parabolic;
    } else if (std::fabs(a) > 1.0) {
        m.kind = MobiusCase::to_zero;
    } else {
        m.kind = MobiusCase::to_nonzero_fixed_point;
    }
    return m;
}

std::string to_string(RecurrenceStop s) {
    switch (s) {
        case RecurrenceStop::budget: return "budget";
        case RecurrenceStop::left_good_set: return "left-good-set";
        case RecurrenceStop::escaped: return "escaped";
    }
    return "unknown";
}

std::string to_string(BajoLizBehavior b) {
    switch (b) {
        case BajoLizBehavior::zero_forever: return "zero-forever";
        case BajoLizBehavior::converges_to_zero: return "converges-to-zero";
        case BajoLizBehavior::two_periodic: return "two-periodic";
        case BajoLizBehavior::tends_to_two_cycle: return "tends-to-two-cycle";
        case BajoLizBehavior::unbounded: return "unbounded";
        case BajoLizBehavior::four_periodic: return "four-periodic";
        case BajoLizBehavior::outside_good_set: return "outside-good-set";
    }
    return "unknown";
}

RecurrenceTrace BajoLiz::iterate(double x0, double x1, std::size_t count, double escape_radius) const {
    RecurrenceTrace t;
    t.x.reserve(count);
    t.x.push_back(x0);
    if (count > 1) t.x.push_back(x1);
    while (t.x.size() < count) {
        const std::size_t n = t.x.size();
        const double den = a + b * t.x[n - 2] * t.x[n - 1];
        if (den == 0.0) {
            t.reason = RecurrenceStop::left_good_set;
            return t;
        }
        t.x.push_back(t.x[n - 2] / den);
        if (!(std::fabs(t.x.back()) <= escape_radius)) {
            t.reason = RecurrenceStop::escaped;
            return t;
        }
    }
    return t;
}

TriangularMap BajoLiz::reduction() const {
    return TriangularMap{
        zero(),
        reciprocal_affine(a, b, "1/(" + fmt(a) + "+" + fmt(b) + "*u)"),
        ScalarFn::builtin("u/(" + fmt(a * a) + "+" + fmt(b * (1.0 + a)) + "*u)",
                          [a = a, b = b](double v) {
                              const double den = a * a + b * (1.0 + a) * v;
                              return den == 0.0 ? kNaN : v / den;
                          }),
    };
}

std::vector<State> BajoLiz::parity_starts(double x0, double x1) const {
    const double den = a + b * x0 * x1;
    const double x2 = den == 0.0 ? kNaN : x0 / den;
    return {{x0, x0 * x1}, {x1, x1 * x2}};
}

double BajoLiz::closed_form_a_minus_one(double b, double x0, double x1, std::size_t n) {
    const double c = b * x0 * x1 - 1.0;
    const int half = static_cast<int>(n / 2);
    return n % 2 == 0 ? x0 / ipow(c, half) : x1 * ipow(c, half);
}

double BajoLiz::closed_form_v_a_one(double b, double v0, std::size_t n) {
    return v0 / (1.0 + 2.0 * b * v0 * static_cast<double>(n));
}

BajoLizPrediction BajoLiz::predict(double x0, double x1) const {
    if (x0 == 0.0 && x1 == 0.0) return {'a', BajoLizBehavior::zero_forever};
    const double u0 = x0 * x1;
    // Good set: the u-orbit never meets the pole of phi.
    {
        const auto m = mobius_classify(a, b);
        double u = u0;
        for (int i = 0; i < 1000; ++i) {
            if (a + b * u == 0.0) return {'-', BajoLizBehavior::outside_good_set};
            u = m.phi(u);
            if (!std::isfinite(u)) break;
        }
    }
    const double u_star = (1.0 - a) / b;
    if (a == -1.0) {
        if (u0 == 0.0) return {'d', BajoLizBehavior::four_periodic};
        if (u0 == u_star) return {'d', BajoLizBehavior::two_periodic};
        return {'d', BajoLizBehavior::unbounded};
    }
    if (a == 1.0) {
        if (u0 == 0.0) return {'e', BajoLizBehavior::two_periodic};
        return {'e', BajoLizBehavior::converges_to_zero};
    }
    if (std::fabs(a) > 1.0) {
        if (u0 == u_star) return {'b', BajoLizBehavior::two_periodic};
        return {'b', BajoLizBehavior::converges_to_zero};
    }
    if (u0 == u_star) return {'c', BajoLizBehavior::two_periodic};
    if (u0 == 0.0) return {'c', BajoLizBehavior::unbounded};
    return {'c', BajoLizBehavior::tends_to_two_cycle};
}

BajoLiz bajo_liz_system(double a, double b) {
    if (b == 0.0) throw PreconditionError("bajo-liz: b = 0 is degenerate");
    return BajoLiz{a, b};
}

// ------------------------------------------------ multiplicative order k

std::string to_string(ZeroFiberCase c) {
    switch (c) {
        case ZeroFiberCase::period_2k: return "2k-periodic";
        case ZeroFiberCase::period_k: return "k-periodic";
        case ZeroFiberCase::to_zero: return "to-zero";
        case ZeroFiberCase::unbounded: return "unbounded";
        case ZeroFiberCase::undetermined: return "undetermined";
    }
    return "unknown";
}

std::vector<double> MultiplicativeReduction::raw(const std::vector<double>& initial, std::size_t count) const {
    const auto k = static_cast<std::size_t>(source.k);
    if (initial.size() != k) throw PreconditionError("multiplicative recurrence: need exactly k initial terms");
    std::vector<double> x(initial.begin(), initial.end());
    while (x.size() < count) {
        const std::size_t n = x.size();
        double prod = x[n - k];
        for (std::size_t i = n - k + 1; i < n; ++i) prod *= x[i];
        x.push_back(x[n - k] * source.g(prod));
    }
    x.resize(std::min(x.size(), count));
    return x;
}

std::vector<State> MultiplicativeReduction::subsystem_starts(const std::vector<double>& initial) const {
    const auto k = static_cast<std::size_t>(source.k);
    const auto x = raw(initial, 2 * k - 1);
    std::vector<State> starts;
    for (std::size_t i = 0; i < k; ++i) {
        double prod = x[i];
        for (std::size_t j = i + 1; j < i + k; ++j) prod *= x[j];
        starts.push_back({x[i], prod});
    }
    return starts;
}

std::vector<double> MultiplicativeReduction::interleave(const std::vector<double>& initial, std::size_t count) const {
    const auto k = static_cast<std::size_t>(source.k);
    std::vector<double> x(count, kNaN);
    const auto starts = subsystem_starts(initial);
    for (std::size_t i = 0; i < k && i < count; ++i) {
        State s = starts[i];
        for (std::size_t n = i; n < count; n += k) {
            x[n] = s.x;
            s = subsystem(s);
        }
    }
    return x;
}

ZeroFiberCase MultiplicativeReduction::zero_fiber_case() const {
    const double g0 = source.g(0.0);
    if (std::isnan(g0)) return ZeroFiberCase::undetermined;
    if (g0 == -1.0) return ZeroFiberCase::period_2k;
    if (g0 == 1.0) return ZeroFiberCase::period_k;
    return std::fabs(g0) < 1.0 ? ZeroFiberCase::to_zero : ZeroFiberCase::unbounded;
}

MultiplicativeReduction multiplicative_order_k(const MultiplicativeRecurrence& r) {
    if (r.k < 2) throw PreconditionError("multiplicative recurrence: need k >= 2");
    MultiplicativeReduction red;
    red.source = r;
    const ScalarFn g = r.g;
    red.phi = ScalarFn::builtin("v*g(v)", [g](double v) { return v * g(v); });
    red.subsystem = TriangularMap{zero(), g, power_iterate(red.phi, r.k)};
    return red;
}

// -------------------------------------------------------------- additive

std::string to_string(AdditiveBehavior b) {
    switch (b) {
        case AdditiveBehavior::converges: return "converges";
        case AdditiveBehavior::two_periodic: return "two-periodic";
        case AdditiveBehavior::fixed_limit: return "fixed-limit";
        case AdditiveBehavior::unbounded: return "unbounded";
        case AdditiveBehavior::undetermined: return "undetermined";
    }
    return "unknown";
}

std::vector<double> AdditiveSystem::raw(double x0, double x1, std::size_t count) const {
    std::vector<double> x{x0, x1};
    const double b = source.b;
    while (x.size() < count) {
        const std::size_t n = x.size();
        x.push_back(-b * x[n - 1] + source.g(x[n - 1] + b * x[n - 2]));
    }
    x.resize(std::min(x.size(), count));
    return x;
}

AdditiveBehavior AdditiveSystem::predict(double u_star) const {
    const double b = source.b;
    if (std::fabs(b) < 1.0) return AdditiveBehavior::converges;
    if (b == 1.0) return AdditiveBehavior::two_periodic;
    if (b == -1.0) return u_star == 0.0 ? AdditiveBehavior::fixed_limit : AdditiveBehavior::unbounded;
    return AdditiveBehavior::unbounded;
}

std::optional<double> AdditiveSystem::predicted_limit(double u_star) const {
    if (!(std::fabs(source.b) < 1.0)) return std::nullopt;
    return u_star / (1.0 + source.b);
}

AdditiveSystem additive_system(const AdditiveRecurrence& r) {
    return AdditiveSystem{r, TriangularMap{ScalarFn::identity(), ScalarFn::constant(-r.b), r.g}};
}

// ---------------------------------------------------------- examples H to K

std::vector<double> ExampleH::raw(double x0, double x1, double x2, std::size_t count) const {
    std::vector<double> x{x0, x1, x2};
    while (x.size() < count) {
        const std::size_t n = x.size();
        const double w = x[n - 1] * x[n - 3];
        x.push_back(w / (x[n - 2] * (a + b * w)));
    }
    x.resize(std::min(x.size(), count));
    return x;
}

ExampleH example_H_system(double a, double b) {
    ExampleH h;
    h.a = a;
    h.b = b;
    h.phi2 = ScalarFn::builtin("v/(" + fmt(b * (a + 1.0)) + "*v+" + fmt(a * a) + ")", [a, b](double v) {
        const double den = b * (a + 1.0) * v + a * a;
        return den == 0.0 ? kNaN : v / den;
    });
    const ScalarFn phi2 = h.phi2;
    h.paired = PlanarMap{
        BivariateFn::builtin("v/y", [](double y, double v) { return v / y; }),
        BivariateFn::builtin("phi2(v)", [phi2](double, double v) { return phi2(v); }),
    };
    h.subsystem = TriangularMap{zero(), reciprocal_affine(a * a, b * (1.0 + a), "1/(a^2+b(1+a)v)"),
                                compose(phi2, phi2)};
    return h;
}

State ExampleI::start(double x0, double x1) const {
    if (!(x0 > 0.0 && x1 > 0.0)) throw PreconditionError("example I needs positive states");
    return {std::log(x0), x1 * std::pow(x0, gamma)};
}

ExampleI example_I_system(double gamma, const ScalarFn& g) {
    ExampleI ex;
    ex.gamma = gamma;
    ex.g = g;
    ex.map = TriangularMap{
        ScalarFn::builtin("ln(u)", [](double u) { return u > 0.0 ? std::log(u) : kNaN; })
            .with_derivative(ScalarFn::builtin("1/u", [](double u) { return u > 0.0 ? 1.0 / u : kNaN; })),
        ScalarFn::constant(-gamma),
        ScalarFn::builtin("u*g(u)", [g](double u) { return u * g(u); }),
    };
    return ex;
}

std::vector<double> ExampleJ::raw(const std::vector<double>& initial, std::size_t count) const {
    const auto kk = static_cast<std::size_t>(k);
    if (initial.size() != kk) throw PreconditionError("example J: need exactly k initial terms");
    std::vector<double> x(initial.begin(), initial.end());
    while (x.size() < count) {
        const std::size_t n = x.size();
        double sum = 0.0;
        for (std::size_t i = n - kk; i < n; ++i) sum += x[i];
        x.push_back(x[n - kk] + f(sum));
    }
    x.resize(std::min(x.size(), count));
    return x;
}

ExampleJ example_J_system(int k, const ScalarFn& f) {
    if (k < 1) throw PreconditionError("example J: need k >= 1");
    ExampleJ ex;
    ex.k = k;
    ex.f = f;
    ex.phi = ScalarFn::identity() + f;
    ex.subsystem = TriangularMap{f, ScalarFn::constant(1.0), power_iterate(ex.phi, k)};
    return ex;
}

TriangularMap example_K_system(double a, const ScalarFn& f) {
    return TriangularMap{ScalarFn::identity(), ScalarFn::constant(-a), ScalarFn::identity() + f};
}

// --------------------------------------------------------------- registry

const std::vector<FamilyInfo>& registry() {
    static const std::vector<FamilyInfo> entries{
        {"power-perturbation", "x' = mu x + a u^j x^l, u' = lambda u",
         "globally attracting fiber with an invariant curve of unbounded orbits",
         {{"lambda", 0.5}, {"mu", 1.0}, {"a", 1.0}, {"j", 1}, {"l", 2}}},
        {"example-b", "x' = (1 + a u) x, u' = lambda u", "fixed-point fiber, limit given by an infinite product",
         {{"a", 1.0}, {"lambda", 0.5}}},
        {"example-c", "x' = (1 - 1/ln|u|) x, u' = lambda u", "fixed-point fiber approached too slowly to converge",
         {{"lambda", 0.5}}},
        {"example-d", "x' = (a + b |u|^alpha) x, u' = lambda u", "fixed-point (a = 1) or 2-periodic (a = -1) fiber",
         {{"a", -1.0}, {"b", 1.0}, {"alpha", 1.0}, {"lambda", 0.5}}},
        {"example-e", "x' = (1 + b |u|^alpha) x, u' = |u| - a |u|^k",
         "non-hyperbolic fiber; converges iff alpha > k - 1",
         {{"a", 1.0}, {"b", 1.0}, {"alpha", 2.0}, {"k", 2.0}}},
        {"quasi-homogeneous", "x' = x p(x^-beta y^alpha), y' = y q(x^-beta y^alpha)",
         "linear quasi-homogeneous planar map reduced along its fibration",
         {{"alpha", 1}, {"beta", -1}, {"p", "0.5"}, {"q", "0.5"}, {"side", "x"}}},
        {"propoexemple", "x' = x (4 - x y) / (6 d), y' = d y (1 + x y)",
         "banded basin of the origin bounded by the hyperbolas x y = 1 -+ sqrt(13)", {{"d", 0.8}}},
        {"mobius", "u' = u / (a + b u)", "real Moebius recurrence and its good set", {{"a", 2.0}, {"b", 1.0}}},
        {"bajo-liz", "x_{n+2} = x_n / (a + b x_n x_{n+1})",
         "second-order multiplicative recurrence via its two-step Moebius reduction", {{"a", 0.5}, {"b", 1.0}}},
        {"multiplicative", "x_{n+k} = x_n g(x_n ... x_{n+k-1})",
         "order-k multiplicative recurrence split into k triangular subsystems", {{"k", 2}, {"g", "1/(0.5+u)"}}},
        {"additive", "x_{n+2} = -b x_{n+1} + g(x_{n+1} + b x_n)", "additive recurrence with f0(u) = u, f1 = -b",
         {{"b", 0.5}, {"g", "(u+1)/2"}}},
        {"example-h", "x_{n+3} = x_{n+2} x_n / (x_{n+1} (a + b x_{n+2} x_n))",
         "third-order recurrence reduced through w_n = x_n x_{n+2}", {{"a", 1.0}, {"b", 1.0}}},
        {"example-i", "x_{n+2} = x_n^gamma g(x_{n+1} x_n^gamma) / x_{n+1}^(gamma-1)",
         "positive recurrence in logarithmic coordinates", {{"gamma", 1.0}, {"g", "1"}}},
        {"example-j", "x_{n+k} = x_n + f(x_n + ... + x_{n+k-1})", "additive order-k recurrence, f1 = 1",
         {{"k", 1}, {"f", "-u/2"}}},
        {"example-k", "x_{n+2} = a x_n + (1 - a) x_{n+1} + f(x_{n+1} + a x_n)", "additive recurrence, f1 = -a",
         {{"a", 0.5}, {"f", "-u/2"}}},
    };
    return entries;
}

namespace {

class Params {
public:
    Params(const FamilyInfo& info, const nlohmann::json& given) : merged_(info.defaults), family_(info.name) {
        if (!given.is_object()) throw PreconditionError(family_ + ": parameters must be a JSON object");
        for (const auto& [key, value] : given.items()) {
            if (key == "family") continue;
            if (!merged_.contains(key)) throw PreconditionError(family_ + ": unknown parameter '" + key + "'");
            const auto& def = merged_[key];
            if (def.is_string() != value.is_string() || (!value.is_string() && !value.is_number())) {
                throw PreconditionError(family_ + ": parameter '" + key + "' has the wrong type");
            }
            merged_[key] = value;
        }
    }

    double num(const std::string& key) const {
        const double v = merged_.at(key).get<double>();
        if (!std::isfinite(v)) throw PreconditionError(family_ + ": parameter '" + key + "' must be finite");
        return v;
    }
    int integer(const std::string& key) const {
        const double v = num(key);
        if (!is_integer(v)) throw PreconditionError(family_ + ": parameter '" + key + "' must be an integer");
        return static_cast<int>(v);
    }
    std::string str(const std::string& key) const { return merged_.at(key).get<std::string>(); }
    ScalarFn fn(const std::string& key) const { return ScalarFn::parse(str(key)); }
    const nlohmann::json& json() const { return merged_; }

private:
    nlohmann::json merged_;
    std::string family_;
};

PlanarMap second_order(std::function<double(double, double)> next, const std::string& name) {
    return PlanarMap{BivariateFn::builtin("y", [](double, double y) { return y; }),
                     BivariateFn::builtin(name, std::move(next))};
}

}  // namespace

FamilyInstance make_family(const std::string& name, const nlohmann::json& given) {
    const auto& entries = registry();
    const auto it = std::find_if(entries.begin(), entries.end(), [&](const FamilyInfo& f) { return f.name == name; });
    if (it == entries.end()) throw PreconditionError("unknown family '" + name + "'");
    const Params p(*it, given);

    FamilyInstance inst;
    inst.family = name;
    inst.params = p.json();

    if (name == "power-perturbation") {
        const auto sys = power_perturbation_map({p.num("lambda"), p.num("mu"), p.num("a"), p.integer("j"), p.integer("l")});
        inst.planar = sys.map;
        inst.triangular = TriangularMap{zero(), ScalarFn::constant(p.num("mu")), linear(p.num("lambda"), "lambda*u")};
        inst.u_star = 0.0;
    } else if (name == "example-b") {
        inst.triangular = example_b(p.num("a"), p.num("lambda"));
        inst.planar = PlanarMap::from(inst.triangular);
        inst.u_star = 0.0;
    } else if (name == "example-c") {
        inst.triangular = example_c(p.num("lambda"));
        inst.planar = PlanarMap::from(inst.triangular);
        inst.u_star = 0.0;
    } else if (name == "example-d") {
        inst.triangular = example_d(p.num("a"), p.num("b"), p.num("alpha"), p.num("lambda"));
        inst.planar = PlanarMap::from(inst.triangular);
        inst.u_star = 0.0;
    } else if (name == "example-e") {
        inst.triangular = example_e(p.num("a"), p.num("b"), p.num("alpha"), p.num("k"));
        inst.planar = PlanarMap::from(inst.triangular);
        inst.u_star = 0.0;
    } else if (name == "quasi-homogeneous") {
        const std::string side = p.str("side");
        if (side != "x" && side != "y") throw PreconditionError("quasi-homogeneous: side must be \"x\" or \"y\"");
        const auto red = quasi_homogeneous_to_triangular({p.integer("alpha"), p.integer("beta"), p.fn("p"), p.fn("q")},
                                                         side == "x" ? Side::x_side : Side::y_side);
        inst.triangular = red.triangular;
        inst.planar = red.planar;
        inst.u_star = 0.0;
    } else if (name == "propoexemple") {
        const auto ex = propoexemple_map(p.num("d"));
        inst.triangular = ex.reduction.triangular;
        inst.planar = ex.reduction.planar;
        inst.u_star = 0.0;
    } else if (name == "mobius") {
        const auto m = mobius_classify(p.num("a"), p.num("b"));
        inst.triangular = TriangularMap{zero(), ScalarFn::constant(1.0), m.phi};
        inst.planar = PlanarMap::from(inst.triangular);
        if (m.kind == MobiusCase::to_nonzero_fixed_point) {
            inst.u_star = m.fixed_points[1];
        } else if (m.kind != MobiusCase::two_periodic) {
            inst.u_star = 0.0;
        }
    } else if (name == "bajo-liz") {
        const auto bl = bajo_liz_system(p.num("a"), p.num("b"));
        inst.triangular = bl.reduction();
        inst.planar = second_order(
            [bl](double x, double y) {
                const double den = bl.a + bl.b * x * y;
                return den == 0.0 ? kNaN : x / den;
            },
            "x/(a+b*x*y)");
        const double a = bl.a;
        if (std::fabs(a) < 1.0) {
            inst.u_star = (1.0 - a) / bl.b;
        } else if (a != -1.0) {
            inst.u_star = 0.0;
        }
        inst.order = 2;
        inst.parity_starts = [bl](const std::vector<double>& x) { return bl.parity_starts(x.at(0), x.at(1)); };
    } else if (name == "multiplicative") {
        const auto red = multiplicative_order_k({p.integer("k"), p.fn("g")});
        inst.triangular = red.subsystem;
        if (red.source.k == 2) {
            const ScalarFn g = red.source.g;
            inst.planar = second_order([g](double x, double y) { return x * g(x * y); }, "x*g(x*y)");
        } else {
            inst.planar = PlanarMap::from(red.subsystem);
        }
        if (std::fabs(red.source.g(0.0)) < 1.0) inst.u_star = 0.0;
        inst.order = static_cast<std::size_t>(red.source.k);
        inst.parity_starts = [red](const std::vector<double>& x) { return red.subsystem_starts(x); };
    } else if (name == "additive") {
        const auto sys = additive_system({p.num("b"), p.fn("g")});
        inst.triangular = sys.map;
        const double b = sys.source.b;
        const ScalarFn g = sys.source.g;
        inst.planar = second_order([b, g](double x, double y) { return -b * y + g(y + b * x); }, "-b*y+g(y+b*x)");
        inst.order = 2;
        inst.parity_starts = [sys](const std::vector<double>& x) { return std::vector<State>{sys.start(x.at(0), x.at(1))}; };
    } else if (name == "example-h") {
        const auto h = example_H_system(p.num("a"), p.num("b"));
        inst.triangular = h.subsystem;
        inst.planar = PlanarMap::from(h.subsystem);
        inst.order = 3;
        inst.parity_starts = [h](const std::vector<double>& x0) {
            const auto x = h.raw(x0.at(0), x0.at(1), x0.at(2), 6);
            std::vector<State> starts;
            for (std::size_t i = 0; i < 4; ++i) starts.push_back({x[i], x[i] * x[i + 2]});
            return starts;
        };
    } else if (name == "example-i") {
        const auto ex = example_I_system(p.num("gamma"), p.fn("g"));
        inst.triangular = ex.map;
        inst.planar = PlanarMap::from(ex.map);
        inst.order = 2;
        inst.parity_starts = [ex](const std::vector<double>& x) { return std::vector<State>{ex.start(x.at(0), x.at(1))}; };
    } else if (name == "example-j") {
        const auto ex = example_J_system(p.integer("k"), p.fn("f"));
        inst.triangular = ex.subsystem;
        inst.planar = PlanarMap::from(ex.subsystem);
        inst.order = static_cast<std::size_t>(ex.k);
        inst.parity_starts = [ex](const std::vector<double>& x0) {
            const auto kk = static_cast<std::size_t>(ex.k);
            const auto x = ex.raw(x0, 2 * kk - 1);
            std::vector<State> starts;
            for (std::size_t i = 0; i < kk; ++i) {
                double sum = 0.0;
                for (std::size_t j = i; j < i + kk; ++j) sum += x[j];
                starts.push_back({x[i], sum});
            }
            return starts;
        };
    } else if (name == "example-k") {
        const double a = p.num("a");
        inst.triangular = example_K_system(a, p.fn("f"));
        inst.planar = PlanarMap::from(inst.triangular);
        inst.order = 2;
        inst.parity_starts = [a](const std::vector<double>& x) { return std::vector<State>{{x.at(0), x.at(1) + a * x.at(0)}}; };
    }

    return inst;
}

}  // namespace fiberdyn::families
