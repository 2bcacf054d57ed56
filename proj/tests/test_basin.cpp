#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fiberdyn/basin.hpp"
#include "fiberdyn/families.hpp"
#include "oracles.hpp"

using namespace fiberdyn;
using namespace fiberdyn::basin;

namespace {

/// Orbit settles near target, by direct iteration.
bool oracle_converges(const ScalarFn& phi, double u, double target) {
    const auto o = oracle::orbit([&](double v) { return phi(v); }, u, 20000);
    return std::fabs(o.back() - target) < 1e-6;
}

bool oracle_escapes(const ScalarFn& phi, double u) {
    for (int n = 0; n < 20000; ++n) {
        u = phi(u);
        if (!(std::fabs(u) <= 1e6)) return true;
    }
    return false;
}

const ScalarFn& psi() {
    static const ScalarFn f = families::propoexemple_map(0.8).reduction.psi;
    return f;
}

RasterSpec small_spec(std::size_t n) {
    RasterSpec s;
    s.x_lo = -4;
    s.x_hi = 4;
    s.y_lo = -4;
    s.y_hi = 4;
    s.nx = n;
    s.ny = n;
    s.attractors = {State{0, 0}};
    return s;
}

}  // namespace

TEST_SUITE("basin") {

TEST_CASE("labels") {
    CHECK(IntervalDecomposition::label(0, 1) == "I1");
    CHECK(IntervalDecomposition::label(1, 3) == "J3");
    CHECK(IntervalDecomposition::label(2, 2) == "K2");
}

TEST_CASE("psi decomposition: basins of 0 and 2") {
    const auto d = decompose_1d(psi(), -17, 17);
    REQUIRE(d.basins.size() == 2);
    CHECK(d.basins[0].attractor == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(d.basins[1].attractor == doctest::Approx(2.0));
    REQUIRE(!d.repellors.empty());
    CHECK(std::any_of(d.repellors.begin(), d.repellors.end(), [](double r) { return std::fabs(r - 1) < 1e-9; }));
    REQUIRE(d.two_cycle.has_value());
    CHECK(std::min(d.two_cycle->first, d.two_cycle->second) == doctest::Approx(1 - std::sqrt(13.0)));

    const auto& i1 = d.basins[0].intervals.front();
    CHECK(i1.generation == 1);
    CHECK(i1.contains(0.0));
    CHECK(i1.hi == doctest::Approx(1.0).epsilon(1e-9));
    const auto& j1 = d.basins[1].intervals.front();
    CHECK(j1.contains(2.0));
    CHECK(j1.lo == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(d.warnings.empty());
}

TEST_CASE("psi decomposition: preimage endpoints map onto parent endpoints") {
    const auto d = decompose_1d(psi(), -17, 17);
    for (const auto& b : d.basins) {
        for (const auto& iv : b.intervals) {
            CHECK(iv.lo < iv.hi);
            if (iv.generation == 1) continue;
            const auto& parent = b.intervals.at(static_cast<std::size_t>(iv.parent));
            CHECK(parent.generation == iv.generation - 1);
            for (auto [clipped, e] : {std::pair{iv.clipped_lo, iv.lo}, std::pair{iv.clipped_hi, iv.hi}}) {
                if (clipped) continue;
                const double image = psi()(e);
                CHECK(std::min(std::fabs(image - parent.lo), std::fabs(image - parent.hi)) < 1e-8);
            }
        }
    }
}

TEST_CASE("psi decomposition: interlacing is ordered and disjoint") {
    const auto d = decompose_1d(psi(), -17, 17);
    const auto entries = d.interlacing();
    std::size_t total = 0;
    for (const auto& b : d.basins) total += b.intervals.size();
    CHECK(entries.size() == total);
    CHECK(total > 2);
    for (std::size_t k = 0; k + 1 < entries.size(); ++k) CHECK(entries[k].interval.hi <= entries[k + 1].interval.lo + 1e-12);
    CHECK(std::is_sorted(d.boundary_points.begin(), d.boundary_points.end()));
}

TEST_CASE("psi decomposition agrees with direct orbits") {
    const auto d = decompose_1d(psi(), -17, 17);
    for (int k = 0; k <= 680; ++k) {
        const double u = -17 + 0.05 * k + 0.0123;
        if (d.distance_to_boundary(u) < 1e-3) continue;
        CAPTURE(u);
        if (const auto b = d.basin_of(u)) {
            CHECK(oracle_converges(psi(), u, d.basins[*b].attractor));
        } else if (d.escapes(u)) {
            CHECK(oracle_escapes(psi(), u));
        }
    }
}

TEST_CASE("contraction: one clipped interval") {
    const auto d = decompose_1d(ScalarFn::parse("u/2"), -4, 4);
    REQUIRE(d.basins.size() == 1);
    REQUIRE(d.basins[0].intervals.size() == 1);
    const auto& iv = d.basins[0].intervals[0];
    CHECK(iv.clipped_lo);
    CHECK(iv.clipped_hi);
    CHECK(d.escape.empty());

    const TriangularMap m{ScalarFn::constant(0), ScalarFn::constant(0.5), ScalarFn::parse("u/2")};
    auto spec = small_spec(40);
    spec.x_lo = spec.y_lo = -1;
    spec.x_hi = spec.y_hi = 1;
    const auto grid = rasterize_2d(m, spec);
    CHECK(std::all_of(grid.labels.begin(), grid.labels.end(), [](std::int32_t l) { return l == 0; }));
    const auto rep = consistency_1d_2d(grid, d, [](double, double y) { return y; }, {0}, 0.0);
    CHECK(rep.compared == 1600);
    CHECK(rep.mismatches == 0);
}

TEST_CASE("decompose_1d preconditions") {
    CHECK_THROWS_AS(decompose_1d(psi(), 1, 1), PreconditionError);
    DecompositionOptions o;
    o.depth = 0;
    CHECK_THROWS_AS(decompose_1d(psi(), -1, 1, o), PreconditionError);
}

TEST_CASE("raster: parallel equals serial for every worker count") {
    const auto map = families::propoexemple_map(0.8).reduction.planar;
    const auto spec = small_spec(64);
    const auto serial = rasterize_2d_serial(map, spec);
    for (int jobs = 1; jobs <= 4; ++jobs) {
        const auto par = rasterize_2d(map, spec, ParallelOptions{Execution::parallel, jobs});
        CHECK(par.labels == serial.labels);
    }
    CHECK(rasterize_2d(map, spec, ParallelOptions{Execution::serial, 0}).labels == serial.labels);
}

TEST_CASE("raster: point symmetry and consistency with the 1-D picture") {
    const auto map = families::propoexemple_map(0.8).reduction.planar;
    const auto grid = rasterize_2d(map, small_spec(100));
    CHECK(point_reflection(grid) == grid.labels);
    CHECK(std::count(grid.labels.begin(), grid.labels.end(), 0) > 0);
    CHECK(std::count(grid.labels.begin(), grid.labels.end(), label::escaped) > 0);

    const auto d = decompose_1d(psi(), -17, 17);
    const auto rep = consistency_1d_2d(grid, d, [](double x, double y) { return x * y; }, {0, label::escaped}, 0.05);
    CHECK(rep.compared > 5000);
    CHECK(rep.mismatch_fraction() <= 0.01);
}

TEST_CASE("raster: |d| > 1 sends every off-axis start away") {
    const auto map = families::propoexemple_map(2.0).reduction.planar;
    const auto grid = rasterize_2d(map, small_spec(50));
    for (std::size_t j = 0; j < 50; ++j) {
        for (std::size_t i = 0; i < 50; ++i) {
            const auto l = grid.at(i, j);
            if (l == label::undecided) continue;
            CHECK(l == label::escaped);
        }
    }
    const auto rep = consistency_1d_2d(grid, all_escape_decomposition(-17, 17), [](double x, double y) { return x * y; },
                                       {}, 0.0);
    CHECK(rep.mismatches == 0);
}

TEST_CASE("classify_start outcomes") {
    const TriangularMap blow{ScalarFn::constant(0), ScalarFn::constant(3), ScalarFn::identity()};
    auto spec = small_spec(2);
    CHECK(classify_start(blow, State{1, 0}, spec) == label::escaped);
    const TriangularMap hold{ScalarFn::constant(0), ScalarFn::constant(-1), ScalarFn::identity()};
    CHECK(classify_start(hold, State{1, 0}, spec) == label::undecided);
    const TriangularMap bad{ScalarFn::constant(0), ScalarFn::parse("ln(u)"), ScalarFn::identity()};
    CHECK(classify_start(bad, State{1, -1}, spec) == label::domain_error);
    spec.attractors = {State{5, 5}, State{0, 0}};
    const TriangularMap shrink{ScalarFn::constant(0), ScalarFn::constant(0.5), ScalarFn::parse("u/2")};
    CHECK(classify_start(shrink, State{1, 1}, spec) == 1);
}

TEST_CASE("raster validation") {
    auto spec = small_spec(1);
    CHECK_THROWS_AS(validate(spec), PreconditionError);
    spec = small_spec(4);
    spec.x_hi = spec.x_lo;
    CHECK_THROWS_AS(validate(spec), PreconditionError);
    spec = small_spec(4);
    spec.attractors = {State{0, 0}, State{0, 0}};
    CHECK_THROWS_AS(validate(spec), PreconditionError);
    CHECK_NOTHROW(validate(small_spec(4)));
}

TEST_CASE("image export") {
    BasinGrid grid;
    grid.spec = small_spec(3);
    grid.spec.ny = 2;
    grid.labels = {0, 1, label::escaped, label::undecided, label::domain_error, 2};

    std::ostringstream pgm;
    write_pgm(pgm, grid);
    const std::string p = pgm.str();
    const std::string head = "P5\n3 2\n255\n";
    REQUIRE(p.size() == head.size() + 6);
    CHECK(p.substr(0, head.size()) == head);
    // top row first: y_hi is row j = 1
    CHECK(static_cast<unsigned char>(p[head.size()]) == 80);
    CHECK(static_cast<unsigned char>(p[head.size() + 1]) == 0);
    CHECK(static_cast<unsigned char>(p[head.size() + 2]) == 160);
    CHECK(static_cast<unsigned char>(p[head.size() + 3]) == 200);
    CHECK(static_cast<unsigned char>(p[head.size() + 5]) == 30);

    std::ostringstream ppm;
    write_ppm(ppm, grid);
    CHECK(ppm.str().size() == std::string("P6\n3 2\n255\n").size() + 18);
    CHECK(ppm.str().rfind("P6\n3 2\n255\n", 0) == 0);

    const auto j = sidecar_json(grid);
    for (const char* key : {"bounds", "resolution", "attractors", "budget", "escape_radius", "tol", "legend", "counts"}) {
        CHECK(j.contains(key));
    }
}

TEST_CASE("decomposition JSON") {
    const auto j = to_json(decompose_1d(psi(), -17, 17));
    CHECK(j.contains("basins"));
    CHECK(j["basins"].size() == 2);
}

}
