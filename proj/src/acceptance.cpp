#include "fiberdyn/acceptance.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "fiberdyn/basin.hpp"
#include "fiberdyn/classify.hpp"
#include "fiberdyn/core.hpp"
#include "fiberdyn/expr.hpp"
#include "fiberdyn/families.hpp"
#include "fiberdyn/fecld.hpp"
#include "fiberdyn/jacobsthal.hpp"

namespace fiberdyn::acceptance {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

/// Collects sub-check outcomes; the first failures are kept for the report.
class Tally {
public:
    void check(bool ok, const std::string& what) {
        ++total_;
        if (ok) return;
        ++failed_;
        if (failures_.size() < 3) failures_.push_back(what);
    }
    void note(std::string s) { notes_.push_back(std::move(s)); }
    bool pass() const { return failed_ == 0; }
    std::string detail() const {
        std::ostringstream os;
        os << (total_ - failed_) << "/" << total_ << " checks";
        for (const auto& n : notes_) os << "; " << n;
        for (const auto& f : failures_) os << "; FAILED " << f;
        return os.str();
    }

private:
    std::size_t total_ = 0;
    std::size_t failed_ = 0;
    std::vector<std::string> failures_;
    std::vector<std::string> notes_;
};

bool near_rel(double a, double b, double tol) { return std::fabs(a - b) <= tol * std::max(std::fabs(b), 1e-300); }

// ---------------------------------------------------------------------- 1

Result fixed_points_and_cycle(const Options&) {
    Tally t;
    const auto t0 = Clock::now();
    const auto psi = families::propoexemple_map(0.8).reduction.psi;

    const auto fps = find_fixed_points(psi, -10.0, 10.0);
    const double want_loc[] = {0.0, 1.0, 2.0};
    const double want_mult[] = {2.0 / 3.0, 7.0 / 6.0, 2.0 / 3.0};
    t.check(fps.size() == 3, "three fixed points (found " + std::to_string(fps.size()) + ")");
    for (std::size_t i = 0; i < std::min<std::size_t>(fps.size(), 3); ++i) {
        t.check(std::fabs(fps[i].location - want_loc[i]) < 1e-6, "fixed point " + fmt(want_loc[i]));
        t.check(std::fabs(fps[i].multiplier - want_mult[i]) < 1e-6, "multiplier at " + fmt(want_loc[i]));
    }

    const auto cycles = find_two_cycles(psi, -10.0, 10.0);
    t.check(cycles.cycles.size() == 1, "one two-cycle");
    if (!cycles.cycles.empty()) {
        const auto [qm, qp] = cycles.cycles.front();
        t.check(std::fabs(qm - (1.0 - std::sqrt(13.0))) < 1e-9, "q- = 1 - sqrt 13");
        t.check(std::fabs(qp - (1.0 + std::sqrt(13.0))) < 1e-9, "q+ = 1 + sqrt 13");
        t.check(std::fabs(psi(qp) - qm) < 1e-12, "psi(q+) = q-");
    }

    const auto pre = find_roots([&](double u) { return psi(u) - 1.0; }, -10.0, 10.0);
    for (double target : {1.0 - std::sqrt(7.0), 1.0 + std::sqrt(7.0)}) {
        const bool found = std::any_of(pre.begin(), pre.end(), [&](double r) { return std::fabs(r - target) < 1e-9; });
        t.check(found, "preimage " + fmt(target) + " of 1");
    }
    const double s = seconds_since(t0);
    t.check(s < 1.0, "runtime below 1 s");
    return {1, "psi fixed points, multipliers, two-cycle, preimages of 1", t.pass(), t.detail(), s};
}

// ---------------------------------------------------------------------- 2

bool observed_matches(const families::BajoLiz& sys, double x0, double x1, families::BajoLizBehavior expected,
                      std::string& why) {
    using B = families::BajoLizBehavior;
    const double u_star = (1.0 - sys.a) / sys.b;
    switch (expected) {
        case B::zero_forever: {
            const auto tr = sys.iterate(x0, x1, 30);
            return std::all_of(tr.x.begin(), tr.x.end(), [](double v) { return v == 0.0; });
        }
        case B::two_periodic:
        case B::four_periodic: {
            const std::size_t p = expected == B::two_periodic ? 2 : 4;
            const auto tr = sys.iterate(x0, x1, 40);
            if (tr.x.size() < 40) return why = "left the good set", false;
            for (std::size_t n = 0; n + p < tr.x.size(); ++n) {
                if (tr.x[n + p] != tr.x[n]) return why = "not exactly periodic", false;
            }
            return true;
        }
        case B::converges_to_zero: {
            const std::size_t N = 200'000;
            const auto tr = sys.iterate(x0, x1, N);
            if (tr.x.size() < N) return why = "stopped early", false;
            double peak = 0.0;
            for (double v : tr.x) peak = std::max(peak, std::fabs(v));
            double tail = 0.0;
            double mid = 0.0;
            for (std::size_t n = N - N / 10; n < N; ++n) tail = std::max(tail, std::fabs(tr.x[n]));
            for (std::size_t n = N / 2; n < N / 2 + N / 10; ++n) mid = std::max(mid, std::fabs(tr.x[n]));
            if (!(tail < 1e-2 * std::max(1.0, peak) && (tail < mid || tail == 0.0))) return why = "tail " + fmt(tail), false;
            return true;
        }
        case B::tends_to_two_cycle: {
            const std::size_t N = 4000;
            const auto tr = sys.iterate(x0, x1, N);
            if (tr.x.size() < N) return why = "stopped early", false;
            const double l0 = tr.x[N - 2];
            const double l1 = tr.x[N - 1];
            const bool settled = std::fabs(tr.x[N - 4] - l0) <= 1e-12 * std::fabs(l0) &&
                                 std::fabs(tr.x[N - 3] - l1) <= 1e-12 * std::fabs(l1);
            if (!settled) return why = "parities not settled", false;
            if (!(std::fabs(l0 * l1 - u_star) < 1e-6)) return why = "l0 l1 = " + fmt(l0 * l1), false;
            return true;
        }
        case B::unbounded: {
            const auto tr = sys.iterate(x0, x1, 400'000, 1e6);
            if (tr.reason != families::RecurrenceStop::escaped) return why = "did not pass radius 1e6", false;
            return true;
        }
        case B::outside_good_set: return why = "outside good set", false;
    }
    return false;
}

Result bajo_liz_sweep(const Options& options) {
    Tally t;
    const auto t0 = Clock::now();
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> mag(0.5, 2.0);
    std::bernoulli_distribution sign(0.5);
    const auto draw = [&] { return sign(rng) ? mag(rng) : -mag(rng); };

    for (double a : {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0}) {
        const auto sys = families::bajo_liz_system(a, 1.0);
        const double u_star = 1.0 - a;
        for (int s = 0; s < 20; ++s) {
            double x0;
            double x1;
            if (s < 14) {
                do {
                    x0 = draw();
                    x1 = draw();
                } while (sys.predict(x0, x1).behavior == families::BajoLizBehavior::outside_good_set);
            } else if (s < 17) {
                x0 = draw();
                x1 = 0.0;
            } else {
                x0 = std::array{1.0, 2.0, -0.5}[static_cast<std::size_t>(s - 17)];
                x1 = u_star / x0;
            }
            const auto pred = sys.predict(x0, x1);
            std::string why;
            const bool ok = observed_matches(sys, x0, x1, pred.behavior, why);
            t.check(ok, "a=" + fmt(a) + " (" + fmt(x0) + "," + fmt(x1) + ") " + families::to_string(pred.behavior) +
                            ": " + why);
        }
    }

    // Closed forms at a = -1 and a = 1.
    for (int s = 0; s < 10; ++s) {
        const double x0 = draw();
        const double x1 = draw();
        const auto minus = families::bajo_liz_system(-1.0, 1.0).iterate(x0, x1, 30);
        bool ok = minus.x.size() == 30;
        for (std::size_t n = 0; ok && n < minus.x.size(); ++n) {
            ok = near_rel(minus.x[n], families::BajoLiz::closed_form_a_minus_one(1.0, x0, x1, n), 1e-9);
        }
        t.check(ok, "a=-1 closed form");
        const auto plus = families::bajo_liz_system(1.0, 1.0).iterate(x0, x1, 30);
        ok = plus.x.size() == 30;
        for (std::size_t n = 0; ok && 2 * n + 1 < plus.x.size(); ++n) {
            const double v = plus.x[2 * n] * plus.x[2 * n + 1];
            ok = near_rel(v, families::BajoLiz::closed_form_v_a_one(1.0, x0 * x1, n), 1e-9);
        }
        t.check(ok, "a=1 closed form");
    }
    return {2, "two-term rational recurrence sweep over a", t.pass(), t.detail(), seconds_since(t0)};
}

// ---------------------------------------------------------------------- 3

Result invariant_curve(const Options&) {
    Tally t;
    const auto t0 = Clock::now();
    const auto sys = families::power_perturbation_map({0.5, 1.0, 1.0, 1, 2});
    for (double u0 : {0.25, 0.5, 1.0, 2.0, 4.0, -1.0, -0.75}) {
        const State start = sys.gamma.point_at(u0);
        const auto tr = iterate(sys.map, start, {40, 1e6, true});
        for (std::size_t n = 0; n <= 20 && n < tr.states.size(); ++n) {
            const State s = tr.states[n];
            const double pred = std::ldexp(start.x, static_cast<int>(n));
            t.check(std::fabs(s.u * s.x - 1.0) < 1e-9, "u x = 1 at n=" + std::to_string(n));
            t.check(std::fabs(s.x - pred) / std::fabs(pred) < 1e-9, "x_n = 2^n x0 at n=" + std::to_string(n));
        }
        t.check(tr.reason == Termination::escaped && tr.steps <= 25,
                "escape by n=25 from u0=" + fmt(u0) + " (steps " + std::to_string(tr.steps) + ")");
    }
    return {3, "invariant curve of the power perturbation", t.pass(), t.detail(), seconds_since(t0)};
}

// ---------------------------------------------------------------------- 4

Result example_b_limit(const Options&) {
    Tally t;
    const auto t0 = Clock::now();
    const auto map = families::example_b(1.0, 0.5);
    double product = 1.0;
    for (int k = 0; k < 200; ++k) product *= 1.0 + std::ldexp(1.0, -(k + 1));
    const auto cert = classify::auto_certificate(map, 0.0, 0.5);
    t.check(cert.has_value(), "hyperbolic certificate accepted");
    const auto rep = classify::estimate_limit(map, {1.0, 0.5}, 0.0, cert);
    t.check(rep.limit.has_value(), "limit returned");
    if (rep.limit) t.check(std::fabs(*rep.limit - product) < 1e-9, "limit " + fmt(*rep.limit) + " vs product");
    t.check(rep.rigorous, "error bound is certificate-backed");
    t.check(rep.error_bound < 1e-9, "error bound " + fmt(rep.error_bound));
    t.note("limit " + (rep.limit ? std::to_string(*rep.limit) : "none") + ", bound " + fmt(rep.error_bound));
    return {4, "product-system limit with rigorous bound", t.pass(), t.detail(), seconds_since(t0)};
}

// ---------------------------------------------------------------------- 5

Result example_c_divergence(const Options&) {
    Tally t;
    const auto t0 = Clock::now();
    const auto map = families::example_c(0.5);
    const State start{1.0, 0.5};
    const auto tr = iterate(map, start, {10'000, 1e300, true});
    const double ln0 = std::log(std::fabs(start.x));
    std::optional<std::size_t> hit;
    double lo = ln0;
    for (std::size_t n = 0; n < tr.states.size(); ++n) {
        const double l = std::log(std::fabs(tr.states[n].x));
        lo = std::min(lo, l);
        if (!hit && l < ln0 - 3.0) hit = n;
    }
    const double ln_end = std::log(std::fabs(tr.last().x));
    t.check(hit.has_value(), "ln|x_n| < ln|x_0| - 3 by n = 1e4 (min " + fmt(lo) + ")");
    t.note("observed ln|x_n| at n=" + std::to_string(tr.steps) + " is " + fmt(ln_end) + ", min " + fmt(lo));
    t.note(std::string("growth (ln|x_n| > ln|x_0| + 3): ") + (ln_end > ln0 + 3.0 ? "yes" : "no"));
    return {5, "slow-fiber divergence: ln|x_n| decreases without bound", t.pass(), t.detail(), seconds_since(t0)};
}

// ---------------------------------------------------------------------- 6

Result example_e_threshold(const Options&) {
    Tally t;
    const auto t0 = Clock::now();
    const State start{1.0, 0.5};
    {
        const auto map = families::example_e(1.0, 1.0, 2.0, 2.0);
        classify::LimitOptions lo;
        lo.tol = 1e-6;
        lo.budget = 100'000;
        const auto rep = classify::estimate_limit(map, start, 0.0, std::nullopt, lo);
        t.check(rep.limit.has_value() && rep.iterations <= 100'000,
                "alpha=2 Cauchy window by 1e5 (iterations " + std::to_string(rep.iterations) + ")");
    }
    {
        const auto map = families::example_e(1.0, 1.0, 1.0, 2.0);
        const auto tr = iterate(map, start, {10'000, 1e300, false});
        t.check(tr.last().x / start.x > 100.0, "alpha=1 x_n/x_0 > 100 by 1e4 (" + fmt(tr.last().x / start.x) + ")");
    }
    const auto p = jacobsthal::jacobsthal_decay(2.0, 1.0, 0.01);
    for (double alpha : {0.5, 0.8, 1.0, 1.05, 1.5, 2.0, 3.0}) {
        const auto map = families::example_e(1.0, 1.0, alpha, 2.0);
        fecld::EnvelopeSpec env{fecld::Envelope::power(1.0, alpha), fecld::Envelope::zero(), 1.0, p};
        const auto cert = fecld::check_certificate(map, 0.0, env);
        const bool refuted = cert.verdict == fecld::Verdict::refuted;
        t.check(refuted == (alpha <= 1.0), "alpha=" + fmt(alpha) + " verdict " + fecld::to_string(cert.verdict));
    }
    return {6, "convergence threshold in alpha", t.pass(), t.detail(), seconds_since(t0)};
}

// ---------------------------------------------------------------------- 7

Result jacobsthal_asymptotics(const Options&) {
    Tally t;
    const auto t0 = Clock::now();
    {
        const auto f = ScalarFn::builtin("x - x^2", [](double x) { return x - x * x; });
        const auto r = jacobsthal::verify_jacobsthal(f, 2.0, 1.0, 0.5, {10'000});
        t.check(std::fabs(r.limit_estimate - 1.0) < 0.01, "k=2: n u_n = " + fmt(r.limit_estimate));
    }
    {
        const auto f = ScalarFn::builtin("x - 2x^3", [](double x) { return x - 2.0 * x * x * x; });
        const auto r = jacobsthal::verify_jacobsthal(f, 3.0, 2.0, 0.5, {1'000'000});
        t.check(std::fabs(r.limit_estimate - 0.5) < 0.01, "k=3: sqrt(n) u_n = " + fmt(r.limit_estimate));
    }
    const double s = seconds_since(t0);
    t.check(s < 5.0, "runtime below 5 s");
    return {7, "iterate decay asymptotics", t.pass(), t.detail(), s};
}

// ---------------------------------------------------------------------- 8

Result raster(const Options& options) {
    Tally t;
    const auto t0 = Clock::now();
    const auto pe = families::propoexemple_map(0.8);
    basin::RasterSpec spec;
    spec.x_lo = spec.y_lo = -4.0;
    spec.x_hi = spec.y_hi = 4.0;
    spec.nx = spec.ny = 400;
    spec.budget = 2000;
    spec.attractors = {{0.0, 0.0}};

    const auto ts = Clock::now();
    const auto serial = basin::rasterize_2d_serial(pe.reduction.planar, spec);
    const double t_serial = seconds_since(ts);
    t.check(t_serial < 60.0, "serial raster below 60 s (" + fmt(t_serial) + " s)");

    const auto decomp = basin::decompose_1d(pe.reduction.psi, -17.0, 17.0);
    const auto xy = [](double x, double y) { return x * y; };
    const auto rep = basin::consistency_1d_2d(serial, decomp, xy, {0, basin::label::escaped}, 0.05);
    t.check(rep.compared > 0 && rep.mismatch_fraction() <= 0.01,
            "agreement with 1-D decomposition (" + std::to_string(rep.mismatches) + "/" +
                std::to_string(rep.compared) + " mismatches)");
    t.check(basin::point_reflection(serial) == serial.labels, "grid equals its point reflection");

    const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t jobs = options.jobs == 0 ? hw : options.jobs;
    const auto par = basin::rasterize_2d(pe.reduction.planar, spec, {Execution::parallel, static_cast<int>(jobs)});
    t.check(par.labels == serial.labels, "parallel grid identical to serial");

    const auto pe2 = families::propoexemple_map(2.0);
    const auto grid2 = basin::rasterize_2d(pe2.reduction.planar, spec, {Execution::parallel, static_cast<int>(jobs)});
    std::size_t bad = 0;
    for (std::size_t j = 0; j < spec.ny; ++j) {
        for (std::size_t i = 0; i < spec.nx; ++i) {
            const auto l = grid2.at(i, j);
            const bool off_axis = spec.x_center(i) != 0.0 && spec.y_center(j) != 0.0;
            if (off_axis && l != basin::label::undecided && l != basin::label::escaped) ++bad;
        }
    }
    t.check(bad == 0, "d=2: decided off-axis cells all escaped (" + std::to_string(bad) + " not)");
    const auto rep2 = basin::consistency_1d_2d(grid2, basin::all_escape_decomposition(-17.0, 17.0), xy, {}, 0.0);
    t.check(rep2.mismatches == 0, "d=2: no mismatch against all-escape decomposition");

    // Speedup shape: time with 1, 2, 4 workers; each doubling must gain at least 1.6x.
    if (hw < 2) {
        t.check(false, "speedup shape not evaluable: " + std::to_string(hw) + " hardware thread");
    } else {
        const auto timed = [&](std::size_t j) {
            double best = 1e300;
            for (int r = 0; r < 3; ++r) {
                const auto s0 = Clock::now();
                (void)basin::rasterize_2d(pe.reduction.planar, spec, {Execution::parallel, static_cast<int>(j)});
                best = std::min(best, seconds_since(s0));
            }
            return best;
        };
        double prev = timed(1);
        for (std::size_t j = 2; j <= std::min<std::size_t>(hw, 4); j *= 2) {
            const double cur = timed(j);
            t.check(prev / cur >= 1.6, "speedup " + std::to_string(j / 2) + "->" + std::to_string(j) + " workers " +
                                           fmt(prev / cur) + "x");
            prev = cur;
        }
    }
    return {8, "planar basin raster against the 1-D decomposition", t.pass(), t.detail(), seconds_since(t0)};
}

// ---------------------------------------------------------------------- 9

Result zero_fiber_periodicity(const Options& options) {
    Tally t;
    const auto t0 = Clock::now();
    std::mt19937_64 rng(options.seed + 9);
    std::uniform_int_distribution<int> digit(-9, 9);
    std::uniform_int_distribution<int> slot(0, 2);
    for (double g0 : {-1.0, 1.0, 0.5, -0.5, 2.0, -2.0}) {
        const auto red = families::multiplicative_order_k(
            {3, ScalarFn::builtin("g", [g0](double v) { return g0 + 0.25 * v; })});
        const auto kind = red.zero_fiber_case();
        using Z = families::ZeroFiberCase;
        const Z want = g0 == -1.0 ? Z::period_2k : g0 == 1.0 ? Z::period_k : std::fabs(g0) < 1.0 ? Z::to_zero : Z::unbounded;
        t.check(kind == want, "g(0)=" + fmt(g0) + " case " + families::to_string(kind));
        for (int s = 0; s < 20; ++s) {
            std::vector<double> init{double(digit(rng)), double(digit(rng)), double(digit(rng))};
            init[static_cast<std::size_t>(slot(rng))] = 0.0;
            const std::string tag = "g(0)=" + fmt(g0) + " start " + std::to_string(s);
            if (std::fabs(g0) == 1.0) {
                const std::size_t p = g0 < 0 ? 6 : 3;
                const auto x = red.raw(init, 120);
                bool ok = true;
                for (std::size_t n = 0; n + p < x.size(); ++n) ok = ok && x[n + p] == x[n];
                t.check(ok, tag + " exactly " + std::to_string(p) + "-periodic");
            } else if (std::fabs(g0) < 1.0) {
                const auto x = red.raw(init, 300);
                t.check(std::fabs(x[297]) + std::fabs(x[298]) + std::fabs(x[299]) < 1e-20, tag + " tends to 0");
            } else {
                const bool nonzero = std::any_of(init.begin(), init.end(), [](double v) { return v != 0.0; });
                const auto x = red.raw(init, 200);
                const bool esc = std::any_of(x.begin(), x.end(), [](double v) { return std::fabs(v) > 1e6; });
                t.check(esc == nonzero, tag + " escapes");
            }
        }
    }
    return {9, "zero-product fiber periodicity, order three", t.pass(), t.detail(), seconds_since(t0)};
}

// --------------------------------------------------------------------- 10

Result additive(const Options& options) {
    Tally t;
    const auto t0 = Clock::now();
    const auto g = ScalarFn::builtin("(u+1)/2", [](double u) { return 0.5 * (u + 1.0); });
    std::mt19937_64 rng(options.seed + 10);
    std::uniform_real_distribution<double> coord(-3.0, 3.0);
    for (int s = 0; s < 10; ++s) {
        const double x0 = coord(rng);
        const double x1 = coord(rng);
        {
            const auto sys = families::additive_system({0.5, g});
            const auto rep = classify::estimate_limit(sys.map, sys.start(x0, x1), 1.0);
            t.check(rep.regime == classify::Regime::global_attractor, "b=1/2 regime A");
            t.check(rep.limit && std::fabs(*rep.limit - 2.0 / 3.0) < 1e-9, "b=1/2 formula limit");
            const auto x = sys.raw(x0, x1, 400);
            t.check(std::fabs(x.back() - 2.0 / 3.0) < 1e-9, "b=1/2 recurrence -> 2/3 (" + fmt(x.back()) + ")");
        }
        {
            const auto sys = families::additive_system({1.0, g});
            const auto rep = classify::estimate_limit(sys.map, sys.start(x0, x1), 1.0);
            t.check(rep.regime == classify::Regime::two_periodic_fiber, "b=1 regime C");
            t.check(rep.limit_even && rep.limit_odd && std::fabs(*rep.limit_even + *rep.limit_odd - 1.0) < 1e-6,
                    "b=1 l0 + l1 = 1");
        }
        {
            const auto sys = families::additive_system({-1.0, g});
            t.check(classify::classify_regime(sys.map, 1.0) == classify::Regime::unbounded, "b=-1 regime unbounded");
            t.check(classify::detect_unbounded(sys.map, sys.start(x0, x1), 1e6, 4'000'000).escaped, "b=-1 orbit escapes");
        }
    }
    return {10, "additive recurrence limits", t.pass(), t.detail(), seconds_since(t0)};
}

// --------------------------------------------------------------------- 11

expr::Ast random_ast(std::mt19937_64& rng, int depth) {
    using expr::Ast;
    using expr::NodeKind;
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 11);
    std::uniform_real_distribution<double> value(0.0, 10.0);
    switch (pick(rng)) {
        case 0: {
            std::uniform_int_distribution<int> style(0, 3);
            switch (style(rng)) {
                case 0: return Ast::constant(std::floor(value(rng)));
                case 1: return Ast::constant(value(rng));
                case 2: return Ast::constant(value(rng) * 1e-7);
                default: return Ast::constant(value(rng) * 1e12);
            }
        }
        case 1: return Ast::variable("u", 0);
        case 2: return Ast::unary(NodeKind::neg, random_ast(rng, depth - 1));
        case 3: return Ast::unary(NodeKind::abs, random_ast(rng, depth - 1));
        case 4: return Ast::unary(NodeKind::ln, random_ast(rng, depth - 1));
        case 5: return Ast::unary(NodeKind::exp, random_ast(rng, depth - 1));
        case 6: return Ast::unary(NodeKind::sqrt, random_ast(rng, depth - 1));
        case 7: return Ast::binary(NodeKind::add, random_ast(rng, depth - 1), random_ast(rng, depth - 1));
        case 8: return Ast::binary(NodeKind::sub, random_ast(rng, depth - 1), random_ast(rng, depth - 1));
        case 9: return Ast::binary(NodeKind::mul, random_ast(rng, depth - 1), random_ast(rng, depth - 1));
        case 10: return Ast::binary(NodeKind::div, random_ast(rng, depth - 1), random_ast(rng, depth - 1));
        default: return Ast::binary(NodeKind::pow, random_ast(rng, depth - 1), random_ast(rng, depth - 1));
    }
}

/// Dyadic value k / 8 with |k| <= 7.
double dyadic(std::mt19937_64& rng) { return std::uniform_int_distribution<int>(-7, 7)(rng) / 8.0; }

TriangularMap dyadic_affine_map(std::mt19937_64& rng) {
    const double a0 = dyadic(rng), a1 = dyadic(rng), b0 = dyadic(rng), b1 = dyadic(rng), c = dyadic(rng);
    return {ScalarFn::builtin("f0", [=](double u) { return a0 + a1 * u; }),
            ScalarFn::builtin("f1", [=](double u) { return b0 + b1 * u; }),
            ScalarFn::builtin("phi", [=](double u) { return 0.5 * u + c; })};
}

Result properties(const Options& options) {
    Tally t;
    const auto t0 = Clock::now();
    std::mt19937_64 rng(options.seed + 11);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    constexpr int kInstances = 100;

    // Fiber preservation: points on one fiber land on one fiber.
    int fails = 0;
    for (int i = 0; i < kInstances; ++i) {
        const double a = unit(rng), b = unit(rng), c = unit(rng), l = 0.9 * unit(rng);
        const TriangularMap m{ScalarFn::builtin("f0", [=](double u) { return a * std::sin(u); }),
                              ScalarFn::builtin("f1", [=](double u) { return b + c * u * u; }),
                              ScalarFn::builtin("phi", [=](double u) { return l * u + u * u * u / 7.0; })};
        const double u = 2.0 * unit(rng);
        State p{3.0 * unit(rng), u};
        State q{3.0 * unit(rng), u};
        for (int n = 0; n < 20; ++n) {
            p = m(p);
            q = m(q);
            if (p.u != q.u) ++fails;
        }
    }
    t.check(fails == 0, "fiber preservation");

    // Regime-C pairing: l_even + l_odd = f0(u*).
    fails = 0;
    for (int i = 0; i < kInstances; ++i) {
        const double us = unit(rng), lam = (unit(rng) < 0 ? -1 : 1) * (0.2 + 0.5 * std::fabs(unit(rng)));
        const double c0 = 2.0 * unit(rng), c1 = 0.5 * unit(rng), c2 = unit(rng);
        const TriangularMap m{ScalarFn::builtin("f0", [=](double u) { return c0 + c2 * (u - us); }),
                              ScalarFn::builtin("f1", [=](double u) { return -1.0 + c1 * (u - us); }),
                              ScalarFn::builtin("phi", [=](double u) { return us + lam * (u - us); })};
        const auto rep = classify::estimate_limit(m, {2.0 * unit(rng), us + 0.3 * unit(rng)}, us);
        if (!(rep.limit_even && rep.limit_odd && std::fabs(*rep.limit_even + *rep.limit_odd - c0) < 1e-6)) ++fails;
    }
    t.check(fails == 0, "regime-C pairing (" + std::to_string(fails) + " failures)");

    // Interleaving: subsystem orbits rebuild the recurrence; two-step map equals two steps.
    fails = 0;
    for (int i = 0; i < kInstances; ++i) {
        const int k = 2 + i % 3;
        const auto red = families::multiplicative_order_k(
            {k, ScalarFn::builtin("g", [](double v) { return std::fabs(v) > 1.0 ? 0.5 : -2.0; })});
        std::vector<double> init;
        for (int j = 0; j < k; ++j) init.push_back(std::ldexp(std::uniform_int_distribution<int>(1, 7)(rng), -2));
        if (red.interleave(init, 24) != red.raw(init, 24)) ++fails;

        const auto m = dyadic_affine_map(rng);
        const auto m2 = two_step(m);
        State a{dyadic(rng), dyadic(rng)};
        State b = a;
        for (int n = 0; n < 3; ++n) {
            a = m(m(a));
            b = m2(b);
            if (!(a == b)) ++fails;
        }
    }
    t.check(fails == 0, "interleaving and two-step reduction (" + std::to_string(fails) + " failures)");

    // Rigorous bounds hold on runs ten times longer.
    fails = 0;
    for (int i = 0; i < kInstances; ++i) {
        const double a = unit(rng), c = unit(rng), d = 0.5 * unit(rng), lam = 0.2 + 0.6 * std::fabs(unit(rng));
        const TriangularMap m{ScalarFn::builtin("f0", [=](double u) { return c * u; }),
                              ScalarFn::builtin("f1", [=](double u) { return 1.0 + a * u + d * u * u; }),
                              ScalarFn::builtin("phi", [=](double u) { return lam * u; })};
        const State start{2.0 * unit(rng), 0.5 * unit(rng)};
        const auto cert = classify::auto_certificate(m, 0.0, 0.5);
        const auto rep = classify::estimate_limit(m, start, 0.0, cert);
        if (!rep.rigorous || !rep.limit) {
            ++fails;
            continue;
        }
        const auto tr = iterate(m, start, {10 * rep.iterations, 1e300, false});
        const double x = tr.last().x;
        if (!(std::fabs(x - *rep.limit) <= rep.error_bound + 1e-13 * std::max(1.0, std::fabs(x)))) ++fails;
    }
    t.check(fails == 0, "rigorous bound soundness (" + std::to_string(fails) + " failures)");

    // Parser round trip.
    fails = 0;
    std::uniform_real_distribution<double> point(-3.0, 3.0);
    for (int i = 0; i < kInstances; ++i) {
        const auto ast = random_ast(rng, 4);
        const std::string text = expr::to_string(ast);
        try {
            const auto back = expr::parse(text);
            if (!(back == ast) || expr::to_string(back) != text) ++fails;
            const double u = point(rng);
            const double v1 = expr::evaluate(ast, std::span<const double>(&u, 1));
            const double v2 = expr::evaluate(back, std::span<const double>(&u, 1));
            if (!(v1 == v2 || (std::isnan(v1) && std::isnan(v2)))) ++fails;
        } catch (const Error&) {
            ++fails;
        }
    }
    t.check(fails == 0, "expression round trip (" + std::to_string(fails) + " failures)");
    t.note(std::to_string(kInstances) + " instances per suite, seed " + std::to_string(options.seed));
    return {11, "property suites", t.pass(), t.detail(), seconds_since(t0)};
}

}  // namespace

Result run(int id, const Options& options) {
    using Fn = Result (*)(const Options&);
    static constexpr Fn table[] = {fixed_points_and_cycle, bajo_liz_sweep, invariant_curve, example_b_limit,
                                   example_c_divergence,   example_e_threshold, jacobsthal_asymptotics, raster,
                                   zero_fiber_periodicity, additive,       properties};
    if (id < 1 || id > kCriteria) throw PreconditionError("acceptance: no criterion " + std::to_string(id));
    try {
        return table[id - 1](options);
    } catch (const std::exception& e) {
        return {id, "criterion " + std::to_string(id), false, std::string("exception: ") + e.what(), 0.0};
    }
}

std::vector<Result> run_all(const Options& options) {
    std::vector<Result> out;
    for (int id = 1; id <= kCriteria; ++id) out.push_back(run(id, options));
    return out;
}

std::string format(const Result& r) {
    char head[64];
    std::snprintf(head, sizeof head, "%s %2d  ", r.pass ? "PASS" : "FAIL", r.id);
    char tail[32];
    std::snprintf(tail, sizeof tail, "  (%.2f s)  ", r.seconds);
    return head + r.title + tail + r.detail;
}

bool report(std::ostream& out, const std::vector<Result>& results) {
    bool all = true;
    for (const auto& r : results) {
        out << format(r) << '\n';
        all = all && r.pass;
    }
    return all;
}

}  // namespace fiberdyn::acceptance
