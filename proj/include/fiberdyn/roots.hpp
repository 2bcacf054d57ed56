#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace fiberdyn {

namespace defaults {
inline constexpr double tol_root = 1e-12;  // |g(root)| acceptance, absolute
inline constexpr double tol_sep = 1e-9;    // roots closer than this are merged
inline constexpr double tol_h = 1e-6;      // hyperbolicity margin on |multiplier|
inline constexpr std::size_t grid = 4096;
}  // namespace defaults

struct RootScanOptions {
    std::size_t grid = defaults::grid;
    double tol_root = defaults::tol_root;
    double tol_sep = defaults::tol_sep;
};

/// Bisects a sign change of g on [a, b] down to adjacent doubles and returns
/// the endpoint with the smaller residual. A NaN midpoint stops refinement.
double bisect(const std::function<double(double)>& g, double a, double b);

/// Scans g on a uniform grid of [lo, hi], refines each sign change by bisection
/// and keeps roots with |g| < tol_root. NaN grid values split the scan, so a
/// pole never pairs with its neighbours. Tangential roots without a sign
/// change are not detected.
std::vector<double> find_roots(const std::function<double(double)>& g, double lo, double hi,
                               const RootScanOptions& options = {});

}  // namespace fiberdyn
