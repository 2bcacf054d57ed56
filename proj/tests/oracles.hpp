#pragma once

// Test-side reference computations, written without the library.

#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

/// prod_{k=0}^{terms-1} (1 + a lambda^k u0)
inline double product(double a, double lambda, double u0, std::size_t terms) {
    double p = 1.0;
    double u = u0;
    for (std::size_t k = 0; k < terms; ++k) {
        p *= 1.0 + a * u;
        u *= lambda;
    }
    return p;
}

/// psi(u) = u (4 - u)(1 + u) / 6, straight from the planar map.
inline double psi_from_planar(double x, double y, double d) {
    const double u = x * y;
    const double xn = x * (4.0 - u) / (6.0 * d);
    const double yn = d * y * (1.0 + u);
    return xn * yn;
}

/// Brute-force orbit of u' = phi(u).
inline std::vector<double> orbit(const std::function<double(double)>& phi, double u0, std::size_t n) {
    std::vector<double> out{u0};
    for (std::size_t k = 0; k < n; ++k) out.push_back(phi(out.back()));
    return out;
}

/// Dyadic k / 8, |k| <= 7: products of a few of these are exact in double.
inline double dyadic(std::mt19937_64& rng) { return std::uniform_int_distribution<int>(-7, 7)(rng) / 8.0; }

}  // namespace oracle
