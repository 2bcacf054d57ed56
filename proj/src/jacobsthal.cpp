#include "fiberdyn/jacobsthal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fiberdyn::jacobsthal {

namespace {

constexpr double kSlopePoint = 1e-4;
constexpr double kSlopeTol = 1e-3;

}  // namespace

double predicted_limit(double k, double a) { return std::pow((k - 1.0) * a, -1.0 / (k - 1.0)); }

AsymptoticReport verify_jacobsthal(const ScalarFn& f, double k, double a, double u0,
                                   std::vector<std::size_t> probes) {
    if (!(k > 1.0) || !(a > 0.0)) throw PreconditionError("jacobsthal: need k > 1 and a > 0");
    if (!(u0 > 0.0)) throw PreconditionViolated("jacobsthal: u0 must be positive", u0);
    if (probes.empty()) throw PreconditionError("jacobsthal: no probe indices");
    std::sort(probes.begin(), probes.end());
    probes.erase(std::unique(probes.begin(), probes.end()), probes.end());

    for (int i = 0; i <= 256; ++i) {
        const double x = u0 * std::pow(10.0, -8.0 * i / 256.0);
        const double fx = f(x);
        // f(x) == x is tolerated where the decrease falls below rounding.
        if (!(fx > 0.0 && fx <= x) || (i == 0 && fx == x)) {
            throw PreconditionViolated("jacobsthal: 0 < f(x) < x fails at x = " + std::to_string(x), x);
        }
    }
    if (!(std::fabs(1.0 - f(kSlopePoint) / kSlopePoint) < kSlopeTol)) {
        throw PreconditionViolated("jacobsthal: f(x)/x is not close to 1 near 0 (hyperbolic decay)", kSlopePoint);
    }

    AsymptoticReport report;
    report.k = k;
    report.a = a;
    report.probes = probes;
    report.predicted = predicted_limit(k, a);

    const double power = 1.0 / (k - 1.0);
    double u = u0;
    std::size_t next = 0;
    for (std::size_t n = 0; next < probes.size(); ++n) {
        if (n == probes[next]) {
            report.values.push_back(std::pow(static_cast<double>(n), power) * u);
            ++next;
        }
        const double v = f(u);
        if (!(v > 0.0 && v < u)) {
            throw PreconditionViolated("jacobsthal: orbit stops decreasing at n = " + std::to_string(n), u);
        }
        u = v;
    }
    report.limit_estimate = report.values.back();
    report.relative_error = std::fabs(report.limit_estimate - report.predicted) / report.predicted;
    return report;
}

fecld::DecaySequence jacobsthal_decay(double k, double a, double delta) {
    if (!(k > 1.0) || !(a > 0.0) || !(delta > 0.0)) {
        throw PreconditionError("jacobsthal_decay: need k > 1, a > 0, delta > 0");
    }
    const double r = 1.0 / (k - 1.0) - delta;
    if (!(r > 0.0)) throw PreconditionError("jacobsthal_decay: exponent 1/(k-1) - delta must be positive");
    return fecld::DecaySequence::power_law(1.0, r);
}

nlohmann::json to_json(const AsymptoticReport& r) {
    return {{"k", r.k},
            {"a", r.a},
            {"probes", r.probes},
            {"values", r.values},
            {"limit_estimate", r.limit_estimate},
            {"predicted", r.predicted},
            {"relative_error", r.relative_error}};
}

}  // namespace fiberdyn::jacobsthal
