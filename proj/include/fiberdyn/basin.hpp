#pragma once

// Basins of attraction: interval decomposition of 1-D basins into preimage
// generations, and escape-time classification of a planar grid.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fiberdyn/core.hpp"
#include "fiberdyn/parallel.hpp"

namespace fiberdyn::basin {

// ------------------------------------------------------------------ 1-D

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    int generation = 1;
    int parent = -1;           // index of the generating interval in the same basin
    bool clipped_lo = false;   // endpoint is the window edge, not a preimage
    bool clipped_hi = false;

    bool contains(double u) const noexcept { return lo < u && u < hi; }
    double midpoint() const noexcept { return lo + 0.5 * (hi - lo); }
};

struct AttractorBasin {
    double attractor = 0.0;
    std::vector<Interval> intervals;  // generation order
};

struct DecompositionOptions {
    std::size_t depth = 6;
    std::size_t grid = defaults::grid;
    std::size_t orbit_budget = 10'000;
    double escape_radius = 1e6;
    double tol = 1e-9;
};

struct IntervalDecomposition {
    double window_lo = 0.0;
    double window_hi = 0.0;
    std::vector<AttractorBasin> basins;
    std::vector<double> repellors;
    std::vector<double> boundary_points;  // interval endpoints that are preimages of repellors
    std::optional<std::pair<double, double>> two_cycle;
    std::vector<Interval> escape;  // orbits leave the escape radius
    std::vector<std::string> warnings;

    /// Index of the basin whose interval list contains u, if any.
    std::optional<std::size_t> basin_of(double u) const;
    bool escapes(double u) const;
    /// Distance from u to the nearest endpoint of any basin or escape interval.
    double distance_to_boundary(double u) const;

    struct Entry {
        std::size_t basin;
        Interval interval;
    };
    /// Every basin interval, ordered along the line.
    std::vector<Entry> interlacing() const;
    /// "I1", "J3", ...: basin letter (I, J, K, ...) and generation.
    static std::string label(std::size_t basin, int generation);
};

/// Immediate basins of the attracting fixed points (grid scan plus predicate
/// bisection, endpoints polished onto preimages of repellors), then `depth`
/// preimage generations obtained by solving phi(u) = endpoint on the window.
IntervalDecomposition decompose_1d(const ScalarFn& phi, double lo, double hi, const DecompositionOptions& options = {});

/// The whole window escapes; no basins.
IntervalDecomposition all_escape_decomposition(double lo, double hi);

/// Orbit of u under phi settles within tol of target for 8 consecutive steps.
bool converges_to(const ScalarFn& phi, double u, double target, std::size_t budget, double tol,
                  double escape_radius = 1e6);

nlohmann::json to_json(const IntervalDecomposition& d);

// ------------------------------------------------------------------ 2-D

namespace label {
inline constexpr std::int32_t escaped = -1;
inline constexpr std::int32_t undecided = -2;
inline constexpr std::int32_t domain_error = -3;
}  // namespace label

struct RasterSpec {
    double x_lo = -1.0;
    double y_lo = -1.0;
    double x_hi = 1.0;
    double y_hi = 1.0;
    std::size_t nx = 2;
    std::size_t ny = 2;
    std::vector<State> attractors;
    std::size_t budget = 2000;
    double escape_radius = 1e6;
    double tol = 1e-6;
    std::size_t hold = 8;

    /// Cell centres placed symmetrically about the rectangle centre, so a
    /// centred rectangle maps exactly onto itself under (x, y) -> (-x, -y).
    double x_center(std::size_t i) const noexcept {
        const double c = 0.5 * (x_lo + x_hi);
        const double d = (x_hi - x_lo) / static_cast<double>(nx);
        return c + (static_cast<double>(i) - 0.5 * static_cast<double>(nx - 1)) * d;
    }
    double y_center(std::size_t j) const noexcept {
        const double c = 0.5 * (y_lo + y_hi);
        const double d = (y_hi - y_lo) / static_cast<double>(ny);
        return c + (static_cast<double>(j) - 0.5 * static_cast<double>(ny - 1)) * d;
    }
};

/// labels[j * nx + i] for the cell centred at (x_center(i), y_center(j));
/// j = 0 is the bottom row.
struct BasinGrid {
    RasterSpec spec;
    std::vector<std::int32_t> labels;

    std::int32_t at(std::size_t i, std::size_t j) const { return labels[j * spec.nx + i]; }
};

void validate(const RasterSpec& spec);

/// Attractor index, escaped, undecided or domain_error for one start.
template <PlaneMap M>
std::int32_t classify_start(const M& map, State s, const RasterSpec& spec) {
    std::size_t streak = 0;
    std::int32_t near = label::undecided;
    for (std::size_t n = 0; n < spec.budget; ++n) {
        s = map(s);
        if (s.x != s.x || s.u != s.u) return label::domain_error;
        if (!(std::fabs(s.x) + std::fabs(s.u) <= spec.escape_radius)) return label::escaped;
        std::int32_t hit = label::undecided;
        for (std::size_t a = 0; a < spec.attractors.size(); ++a) {
            const State& p = spec.attractors[a];
            if (std::fmax(std::fabs(s.x - p.x), std::fabs(s.u - p.u)) < spec.tol) {
                hit = static_cast<std::int32_t>(a);
                break;
            }
        }
        streak = (hit != label::undecided && hit == near) ? streak + 1 : (hit != label::undecided ? 1 : 0);
        near = hit;
        if (streak >= spec.hold) return near;
    }
    return label::undecided;
}

/// Reference implementation: row-major loop.
template <PlaneMap M>
BasinGrid rasterize_2d_serial(const M& map, const RasterSpec& spec) {
    validate(spec);
    BasinGrid grid{spec, std::vector<std::int32_t>(spec.nx * spec.ny)};
    for (std::size_t j = 0; j < spec.ny; ++j) {
        for (std::size_t i = 0; i < spec.nx; ++i) {
            grid.labels[j * spec.nx + i] = classify_start(map, State{spec.x_center(i), spec.y_center(j)}, spec);
        }
    }
    return grid;
}

/// Rows distributed over OpenMP threads; each row writes its own slice.
template <PlaneMap M>
BasinGrid rasterize_2d(const M& map, const RasterSpec& spec, const ParallelOptions& parallel = {}) {
    if (parallel.execution == Execution::serial) return rasterize_2d_serial(map, spec);
    validate(spec);
    BasinGrid grid{spec, std::vector<std::int32_t>(spec.nx * spec.ny)};
    const auto rows = static_cast<std::ptrdiff_t>(spec.ny);
#pragma omp parallel for schedule(dynamic, 1) num_threads(resolve_jobs(parallel))
    for (std::ptrdiff_t jj = 0; jj < rows; ++jj) {
        const auto j = static_cast<std::size_t>(jj);
        for (std::size_t i = 0; i < spec.nx; ++i) {
            grid.labels[j * spec.nx + i] = classify_start(map, State{spec.x_center(i), spec.y_center(j)}, spec);
        }
    }
    return grid;
}

/// Label array reflected through the rectangle centre.
std::vector<std::int32_t> point_reflection(const BasinGrid& grid);

struct ConsistencyReport {
    std::size_t compared = 0;
    std::size_t mismatches = 0;
    std::size_t excluded = 0;  // undecided, near a 1-D boundary, or unclassified in 1-D
    double mismatch_fraction() const noexcept {
        return compared == 0 ? 0.0 : static_cast<double>(mismatches) / static_cast<double>(compared);
    }
};

/// Compares decided cells with the 1-D basin of u_of(x, y). basin_labels[b]
/// is the 2-D label expected for 1-D basin b; escaping u expects `escaped`.
/// Cells whose u lies within margin of a 1-D boundary are excluded. With
/// stride > 1 only every stride-th cell is examined.
ConsistencyReport consistency_1d_2d(const BasinGrid& grid, const IntervalDecomposition& decomposition,
                                    const std::function<double(double, double)>& u_of,
                                    const std::vector<std::int32_t>& basin_labels, double margin,
                                    std::size_t stride = 1);

/// Gray levels: attractor 0 -> 200, attractor 1 -> 120, other attractors ->
/// 160, escaped -> 30, undecided -> 80, domain error -> 0.
std::uint8_t gray_level(std::int32_t label) noexcept;
/// Colour palette for the PPM export.
std::array<std::uint8_t, 3> palette_color(std::int32_t label) noexcept;

/// Binary P5 / P6 with the top row at y_hi.
void write_pgm(std::ostream& out, const BasinGrid& grid);
void write_ppm(std::ostream& out, const BasinGrid& grid);
nlohmann::json sidecar_json(const BasinGrid& grid);

}  // namespace fiberdyn::basin
