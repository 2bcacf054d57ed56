#include "fiberdyn/basin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>

namespace fiberdyn::basin {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Bisects a predicate boundary; `inside` satisfies pred, `outside` does not.
double bisect_predicate(const std::function<bool(double)>& pred, double inside, double outside) {
    for (int i = 0; i < 200; ++i) {
        const double mid = inside + 0.5 * (outside - inside);
        if (mid == inside || mid == outside) break;
        (pred(mid) ? inside : outside) = mid;
    }
    return inside + 0.5 * (outside - inside);
}

// Moves e onto a nearby solution of phi^m(u) = target, m = 0..4, when one
// brackets e closely.
std::optional<double> polish(const ScalarFn& phi, double e, const std::vector<double>& targets) {
    const double delta = 1e-7 * std::max(1.0, std::fabs(e));
    for (int m = 0; m <= 4; ++m) {
        for (double target : targets) {
            const auto g = [&](double u) {
                for (int k = 0; k < m; ++k) u = phi(u);
                return u - target;
            };
            const double a = e - delta;
            const double b = e + delta;
            const double ga = g(a);
            const double gb = g(b);
            if (std::isnan(ga) || std::isnan(gb)) continue;
            if (ga == 0.0) return a;
            if (gb == 0.0) return b;
            if (std::signbit(ga) == std::signbit(gb)) continue;
            const double r = bisect(g, a, b);
            if (std::fabs(g(r)) < 1e-9) return r;
        }
    }
    return std::nullopt;
}

bool overlaps(const Interval& a, const Interval& b) {
    return std::max(a.lo, b.lo) < std::min(a.hi, b.hi);
}

std::vector<double> endpoints(const IntervalDecomposition& d) {
    std::vector<double> pts = d.repellors;
    const auto add = [&pts](const Interval& iv) {
        if (!iv.clipped_lo) pts.push_back(iv.lo);
        if (!iv.clipped_hi) pts.push_back(iv.hi);
    };
    for (const auto& b : d.basins)
        for (const auto& iv : b.intervals) add(iv);
    for (const auto& iv : d.escape) add(iv);
    return pts;
}

}  // namespace

// ------------------------------------------------------------------ 1-D

bool converges_to(const ScalarFn& phi, double u, double target, std::size_t budget, double tol,
                  double escape_radius) {
    std::size_t streak = 0;
    for (std::size_t n = 0; n < budget; ++n) {
        u = phi(u);
        if (!(std::fabs(u) <= escape_radius)) return false;
        streak = std::fabs(u - target) < tol ? streak + 1 : 0;
        if (streak >= 8) return true;
    }
    return false;
}

namespace {

bool escapes_orbit(const ScalarFn& phi, double u, std::size_t budget, double radius) {
    for (std::size_t n = 0; n < budget; ++n) {
        u = phi(u);
        if (std::isnan(u)) return false;
        if (!(std::fabs(u) <= radius)) return true;
    }
    return false;
}

}  // namespace

std::optional<std::size_t> IntervalDecomposition::basin_of(double u) const {
    for (std::size_t b = 0; b < basins.size(); ++b) {
        for (const auto& iv : basins[b].intervals) {
            if (iv.contains(u)) return b;
        }
    }
    return std::nullopt;
}

bool IntervalDecomposition::escapes(double u) const {
    return std::any_of(escape.begin(), escape.end(), [u](const Interval& iv) {
        return (iv.clipped_lo ? iv.lo <= u : iv.lo < u) && (iv.clipped_hi ? u <= iv.hi : u < iv.hi);
    });
}

double IntervalDecomposition::distance_to_boundary(double u) const {
    double best = kInf;
    for (double e : endpoints(*this)) best = std::min(best, std::fabs(u - e));
    return best;
}

std::vector<IntervalDecomposition::Entry> IntervalDecomposition::interlacing() const {
    std::vector<Entry> all;
    for (std::size_t b = 0; b < basins.size(); ++b)
        for (const auto& iv : basins[b].intervals) all.push_back({b, iv});
    std::sort(all.begin(), all.end(), [](const Entry& x, const Entry& y) { return x.interval.lo < y.interval.lo; });
    return all;
}

std::string IntervalDecomposition::label(std::size_t basin, int generation) {
    return std::string(1, static_cast<char>('I' + basin)) + std::to_string(generation);
}

IntervalDecomposition decompose_1d(const ScalarFn& phi, double lo, double hi, const DecompositionOptions& options) {
    if (!(lo < hi)) throw PreconditionError("decompose_1d: empty window");
    if (options.depth < 1) throw PreconditionError("decompose_1d: depth must be at least 1");

    IntervalDecomposition d;
    d.window_lo = lo;
    d.window_hi = hi;

    FixedPointOptions fpo;
    fpo.scan.grid = options.grid;
    std::vector<double> attractors;
    for (const auto& fp : find_fixed_points(phi, lo, hi, fpo)) {
        if (fp.kind == FixedPointClass::hyperbolic_attractor) {
            attractors.push_back(fp.location);
        } else if (fp.kind == FixedPointClass::hyperbolic_repellor) {
            d.repellors.push_back(fp.location);
        }
    }
    RootScanOptions scan;
    scan.grid = options.grid;
    const auto cycles = find_two_cycles(phi, lo, hi, scan);
    if (cycles.cycles.size() == 1) d.two_cycle = cycles.cycles.front();

    std::vector<double> targets = d.repellors;
    if (d.two_cycle) {
        targets.push_back(d.two_cycle->first);
        targets.push_back(d.two_cycle->second);
    }
    const double h = (hi - lo) / static_cast<double>(options.grid - 1);

    // Immediate basins.
    for (double a : attractors) {
        const auto pred = [&](double u) {
            return converges_to(phi, u, a, options.orbit_budget, options.tol, options.escape_radius);
        };
        Interval iv;
        for (int dir : {-1, +1}) {
            double prev = a;
            double end = dir < 0 ? lo : hi;
            bool clipped = true;
            for (std::size_t k = 1;; ++k) {
                const double u = a + dir * static_cast<double>(k) * h;
                if (dir < 0 ? u <= lo : u >= hi) break;
                if (!pred(u)) {
                    end = bisect_predicate(pred, prev, u);
                    clipped = false;
                    break;
                }
                prev = u;
            }
            if (!clipped) {
                if (const auto p = polish(phi, end, targets)) {
                    end = *p;
                } else {
                    d.warnings.push_back("immediate basin endpoint " + std::to_string(end) +
                                         " is not a preimage of a repellor");
                }
            }
            (dir < 0 ? iv.lo : iv.hi) = end;
            (dir < 0 ? iv.clipped_lo : iv.clipped_hi) = clipped;
        }
        d.basins.push_back({a, {iv}});
    }

    // Escape region: runs of escaping grid points.
    {
        const auto pred = [&](double u) { return escapes_orbit(phi, u, options.orbit_budget, options.escape_radius); };
        std::optional<Interval> run;
        double prev_u = lo;
        bool prev_in = false;
        for (std::size_t i = 0; i < options.grid; ++i) {
            const double u = i + 1 == options.grid ? hi : lo + static_cast<double>(i) * h;
            const bool in = pred(u);
            if (in && !run) {
                run = Interval{};
                run->generation = 0;
                if (i == 0) {
                    run->lo = lo;
                    run->clipped_lo = true;
                } else {
                    const double e = bisect_predicate(pred, u, prev_u);
                    run->lo = polish(phi, e, targets).value_or(e);
                }
            } else if (!in && run) {
                const double e = bisect_predicate(pred, prev_u, u);
                run->hi = polish(phi, e, targets).value_or(e);
                d.escape.push_back(*run);
                run.reset();
            }
            prev_u = u;
            prev_in = in;
        }
        if (run) {
            run->hi = hi;
            run->clipped_hi = true;
            d.escape.push_back(*run);
        }
        (void)prev_in;
    }

    // Preimage generations.
    const auto all_intervals = [&d]() {
        std::vector<Interval> all;
        for (const auto& b : d.basins) all.insert(all.end(), b.intervals.begin(), b.intervals.end());
        return all;
    };
    for (auto& basin : d.basins) {
        bool truncated = false;
        for (int gen = 2; gen <= static_cast<int>(options.depth) && !truncated; ++gen) {
            const std::size_t count = basin.intervals.size();
            for (std::size_t idx = 0; idx < count && !truncated; ++idx) {
                const Interval parent = basin.intervals[idx];
                if (parent.generation != gen - 1) continue;
                std::vector<double> breaks{lo, hi};
                for (const auto& [clipped, value] : {std::pair{parent.clipped_lo, parent.lo}, std::pair{parent.clipped_hi, parent.hi}}) {
                    if (clipped) continue;
                    const auto roots = find_roots([&](double u) { return phi(u) - value; }, lo, hi, scan);
                    breaks.insert(breaks.end(), roots.begin(), roots.end());
                }
                std::sort(breaks.begin(), breaks.end());
                breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
                const auto existing = all_intervals();
                for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
                    Interval piece;
                    piece.lo = breaks[k];
                    piece.hi = breaks[k + 1];
                    piece.generation = gen;
                    piece.parent = static_cast<int>(idx);
                    piece.clipped_lo = piece.lo == lo;
                    piece.clipped_hi = piece.hi == hi;
                    const double v = phi(piece.midpoint());
                    if (!std::isfinite(v)) continue;
                    const bool inside = (parent.clipped_lo || v > parent.lo) && (parent.clipped_hi || v < parent.hi);
                    if (!inside) continue;
                    if (std::any_of(existing.begin(), existing.end(),
                                    [&](const Interval& e) { return overlaps(e, piece); })) {
                        continue;
                    }
                    const bool sound_lo = piece.clipped_lo || std::fabs(phi(piece.lo) - parent.lo) < defaults::tol_root ||
                                          std::fabs(phi(piece.lo) - parent.hi) < defaults::tol_root;
                    const bool sound_hi = piece.clipped_hi || std::fabs(phi(piece.hi) - parent.lo) < defaults::tol_root ||
                                          std::fabs(phi(piece.hi) - parent.hi) < defaults::tol_root;
                    if (!sound_lo || !sound_hi) {
                        d.warnings.push_back("generation " + std::to_string(gen) +
                                             ": preimage endpoint failed to solve; truncated");
                        truncated = true;
                        break;
                    }
                    basin.intervals.push_back(piece);
                }
            }
        }
    }

    std::set<double> boundary(d.repellors.begin(), d.repellors.end());
    for (const auto& b : d.basins) {
        for (const auto& iv : b.intervals) {
            if (!iv.clipped_lo) boundary.insert(iv.lo);
            if (!iv.clipped_hi) boundary.insert(iv.hi);
        }
    }
    for (double e : boundary) {
        if (d.boundary_points.empty() || e - d.boundary_points.back() > 1e-12) d.boundary_points.push_back(e);
    }
    return d;
}

IntervalDecomposition all_escape_decomposition(double lo, double hi) {
    IntervalDecomposition d;
    d.window_lo = lo;
    d.window_hi = hi;
    Interval iv{lo, hi, 0, -1, true, true};
    d.escape.push_back(iv);
    return d;
}

nlohmann::json to_json(const IntervalDecomposition& d) {
    const auto interval_json = [](const Interval& iv) {
        return nlohmann::json{{"lo", iv.lo},
                              {"hi", iv.hi},
                              {"generation", iv.generation},
                              {"parent", iv.parent},
                              {"clipped_lo", iv.clipped_lo},
                              {"clipped_hi", iv.clipped_hi}};
    };
    nlohmann::json basins = nlohmann::json::array();
    for (std::size_t b = 0; b < d.basins.size(); ++b) {
        nlohmann::json ivs = nlohmann::json::array();
        for (const auto& iv : d.basins[b].intervals) ivs.push_back(interval_json(iv));
        basins.push_back({{"attractor", d.basins[b].attractor},
                          {"name", std::string(1, static_cast<char>('I' + b))},
                          {"intervals", ivs}});
    }
    nlohmann::json escape = nlohmann::json::array();
    for (const auto& iv : d.escape) escape.push_back(interval_json(iv));
    nlohmann::json order = nlohmann::json::array();
    for (const auto& e : d.interlacing()) order.push_back(IntervalDecomposition::label(e.basin, e.interval.generation));
    nlohmann::json j{{"window", {d.window_lo, d.window_hi}},
                     {"basins", basins},
                     {"repellors", d.repellors},
                     {"boundary_points", d.boundary_points},
                     {"escape", escape},
                     {"interlacing", order},
                     {"warnings", d.warnings}};
    j["two_cycle"] = d.two_cycle ? nlohmann::json{d.two_cycle->first, d.two_cycle->second} : nlohmann::json(nullptr);
    return j;
}

// ------------------------------------------------------------------ 2-D

void validate(const RasterSpec& spec) {
    if (spec.nx < 2 || spec.ny < 2) throw PreconditionError("raster: nx and ny must be at least 2");
    if (!(spec.x_lo < spec.x_hi) || !(spec.y_lo < spec.y_hi)) throw PreconditionError("raster: empty rectangle");
    for (std::size_t a = 0; a < spec.attractors.size(); ++a) {
        for (std::size_t b = a + 1; b < spec.attractors.size(); ++b) {
            if (spec.attractors[a] == spec.attractors[b]) throw PreconditionError("raster: attractors must be distinct");
        }
    }
}

std::vector<std::int32_t> point_reflection(const BasinGrid& grid) {
    const auto nx = grid.spec.nx;
    const auto ny = grid.spec.ny;
    std::vector<std::int32_t> out(grid.labels.size());
    for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 0; i < nx; ++i) out[j * nx + i] = grid.labels[(ny - 1 - j) * nx + (nx - 1 - i)];
    return out;
}

ConsistencyReport consistency_1d_2d(const BasinGrid& grid, const IntervalDecomposition& decomposition,
                                    const std::function<double(double, double)>& u_of,
                                    const std::vector<std::int32_t>& basin_labels, double margin, std::size_t stride) {
    ConsistencyReport report;
    const auto& spec = grid.spec;
    const std::size_t step = std::max<std::size_t>(stride, 1);
    for (std::size_t idx = 0; idx < grid.labels.size(); idx += step) {
        const std::int32_t got = grid.labels[idx];
        if (got == label::undecided || got == label::domain_error) {
            ++report.excluded;
            continue;
        }
        const double u = u_of(spec.x_center(idx % spec.nx), spec.y_center(idx / spec.nx));
        if (decomposition.distance_to_boundary(u) < margin) {
            ++report.excluded;
            continue;
        }
        std::int32_t expected;
        if (const auto b = decomposition.basin_of(u)) {
            expected = *b < basin_labels.size() ? basin_labels[*b] : label::undecided;
        } else if (decomposition.escapes(u)) {
            expected = label::escaped;
        } else {
            ++report.excluded;
            continue;
        }
        ++report.compared;
        if (got != expected) ++report.mismatches;
    }
    return report;
}

std::uint8_t gray_level(std::int32_t l) noexcept {
    switch (l) {
        case 0: return 200;
        case 1: return 120;
        case label::escaped: return 30;
        case label::undecided: return 80;
        case label::domain_error: return 0;
        default: return 160;
    }
}

std::array<std::uint8_t, 3> palette_color(std::int32_t l) noexcept {
    switch (l) {
        case 0: return {230, 159, 0};
        case 1: return {86, 180, 233};
        case label::escaped: return {20, 20, 60};
        case label::undecided: return {128, 128, 128};
        case label::domain_error: return {0, 0, 0};
        default: return {0, 158, 115};
    }
}

void write_pgm(std::ostream& out, const BasinGrid& grid) {
    const auto nx = grid.spec.nx;
    const auto ny = grid.spec.ny;
    out << "P5\n" << nx << ' ' << ny << "\n255\n";
    std::vector<char> row(nx);
    for (std::size_t r = 0; r < ny; ++r) {
        const std::size_t j = ny - 1 - r;
        for (std::size_t i = 0; i < nx; ++i) row[i] = static_cast<char>(gray_level(grid.at(i, j)));
        out.write(row.data(), static_cast<std::streamsize>(nx));
    }
}

void write_ppm(std::ostream& out, const BasinGrid& grid) {
    const auto nx = grid.spec.nx;
    const auto ny = grid.spec.ny;
    out << "P6\n" << nx << ' ' << ny << "\n255\n";
    std::vector<char> row(3 * nx);
    for (std::size_t r = 0; r < ny; ++r) {
        const std::size_t j = ny - 1 - r;
        for (std::size_t i = 0; i < nx; ++i) {
            const auto c = palette_color(grid.at(i, j));
            for (int k = 0; k < 3; ++k) row[3 * i + k] = static_cast<char>(c[k]);
        }
        out.write(row.data(), static_cast<std::streamsize>(row.size()));
    }
}

nlohmann::json sidecar_json(const BasinGrid& grid) {
    const auto& s = grid.spec;
    nlohmann::json attractors = nlohmann::json::array();
    for (const auto& a : s.attractors) attractors.push_back({a.x, a.u});
    std::map<std::string, std::size_t> counts;
    const auto name = [](std::int32_t l) -> std::string {
        switch (l) {
            case label::escaped: return "escaped";
            case label::undecided: return "undecided";
            case label::domain_error: return "domain-error";
            default: return "attractor-" + std::to_string(l);
        }
    };
    for (auto l : grid.labels) ++counts[name(l)];
    nlohmann::json legend = nlohmann::json::array();
    for (std::int32_t l = 0; l < static_cast<std::int32_t>(s.attractors.size()); ++l) {
        legend.push_back({{"label", name(l)}, {"gray", gray_level(l)}});
    }
    for (std::int32_t l : {label::escaped, label::undecided, label::domain_error}) {
        legend.push_back({{"label", name(l)}, {"gray", gray_level(l)}});
    }
    return {{"bounds", {{"x_lo", s.x_lo}, {"y_lo", s.y_lo}, {"x_hi", s.x_hi}, {"y_hi", s.y_hi}}},
            {"resolution", {{"nx", s.nx}, {"ny", s.ny}}},
            {"attractors", attractors},
            {"budget", s.budget},
            {"escape_radius", s.escape_radius},
            {"tol", s.tol},
            {"legend", legend},
            {"counts", counts}};
}

}  // namespace fiberdyn::basin
