#include "fiberdyn/roots.hpp"

#include <algorithm>
#include <cmath>

#include "fiberdyn/error.hpp"

namespace fiberdyn {

double bisect(const std::function<double(double)>& g, double a, double b) {
    double fa = g(a);
    double fb = g(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    for (int iter = 0; iter < 2200; ++iter) {
        const double mid = a + 0.5 * (b - a);
        if (mid == a || mid == b) break;
        const double fm = g(mid);
        if (std::isnan(fm)) break;
        if (fm == 0.0) return mid;
        if (std::signbit(fm) == std::signbit(fa)) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
            fb = fm;
        }
    }
    return std::fabs(fa) <= std::fabs(fb) ? a : b;
}

std::vector<double> find_roots(const std::function<double(double)>& g, double lo, double hi,
                               const RootScanOptions& options) {
    if (!(lo < hi)) throw PreconditionError("find_roots: empty interval");
    if (options.grid < 2) throw PreconditionError("find_roots: grid must have at least 2 points");

    const std::size_t n = options.grid;
    const double step = (hi - lo) / static_cast<double>(n - 1);
    std::vector<double> roots;

    double prev_u = lo;
    double prev_g = g(lo);
    if (prev_g == 0.0) roots.push_back(lo);
    for (std::size_t i = 1; i < n; ++i) {
        const double u = (i == n - 1) ? hi : lo + static_cast<double>(i) * step;
        const double gu = g(u);
        if (gu == 0.0) {
            roots.push_back(u);
        } else if (!std::isnan(gu) && !std::isnan(prev_g) && prev_g != 0.0 &&
                   std::signbit(gu) != std::signbit(prev_g)) {
            const double r = bisect(g, prev_u, u);
            if (std::fabs(g(r)) < options.tol_root) roots.push_back(r);
        }
        prev_u = u;
        prev_g = gu;
    }

    std::sort(roots.begin(), roots.end());
    std::vector<double> unique;
    for (double r : roots) {
        if (unique.empty() || std::fabs(r - unique.back()) >= options.tol_sep) {
            unique.push_back(r);
        } else if (std::fabs(g(r)) < std::fabs(g(unique.back()))) {
            unique.back() = r;
        }
    }
    return unique;
}

}  // namespace fiberdyn
