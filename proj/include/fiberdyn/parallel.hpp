#pragma once

// Data-parallel helpers. Every kernel has a serial reference path; the OpenMP
// path writes into disjoint slots, so results never depend on the thread count.

#include <cstddef>
#include <span>
#include <vector>

#include <omp.h>

namespace fiberdyn {

enum class Execution { serial, parallel };

/// Worker count for OpenMP regions; 0 means "use the runtime default".
struct ParallelOptions {
    Execution execution = Execution::parallel;
    int jobs = 0;
};

inline int resolve_jobs(const ParallelOptions& options) {
    return options.jobs > 0 ? options.jobs : omp_get_max_threads();
}

/// out[i] = f(i) for i in [0, n).
template <class F>
std::vector<double> tabulate(std::size_t n, F&& f, const ParallelOptions& options = {}) {
    std::vector<double> out(n);
    if (options.execution == Execution::serial) {
        for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
        return out;
    }
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) num_threads(resolve_jobs(options))
    for (std::ptrdiff_t i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
    return out;
}

/// Pairwise (cascade) summation; the split points depend only on the length,
/// so the result is bit-identical across runs and thread counts.
inline double pairwise_sum(std::span<const double> values) {
    constexpr std::size_t kLeaf = 32;
    if (values.size() <= kLeaf) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace fiberdyn
