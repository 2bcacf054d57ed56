// fiberdyn: command-line front end.
//
//   fiberdyn simulate  --family NAME [params] --x0 X --u0 U --steps N
//   fiberdyn classify  --family bajo-liz --a 0.5 --b 1 --x0 1 --x1 2
//   fiberdyn certify   --f0 0 --f1 "1+u" --phi "u/2" --u-star 0
//   fiberdyn basin     --family propoexemple --d 0.8 --rect -4 -4 4 4 --res 400 --out fig
//   fiberdyn families list
//   fiberdyn verify    [--seed S] [--only N]
//
// Exit codes: 2 usage error, 1 failed verification or runtime error, 0 otherwise.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fiberdyn/acceptance.hpp"
#include "fiberdyn/basin.hpp"
#include "fiberdyn/classify.hpp"
#include "fiberdyn/core.hpp"
#include "fiberdyn/families.hpp"
#include "fiberdyn/fecld.hpp"

using namespace fiberdyn;
using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

const CLI::Validator finite_number = CLI::Validator(
    [](std::string& s) -> std::string {
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size() || !std::isfinite(v)) return "not a finite number: " + s;
        } catch (const std::exception&) {
            return "not a number: " + s;
        }
        return {};
    },
    "FINITE");

/// Map selection shared by simulate, classify, certify and basin.
struct MapArgs {
    std::string family;
    std::map<std::string, std::string> params;
    std::map<std::string, CLI::Option*> param_opts;
    std::string f0 = "0";
    std::string f1 = "1";
    std::string phi;
    CLI::Option* f0_opt = nullptr;
    CLI::Option* f1_opt = nullptr;
    CLI::Option* phi_opt = nullptr;

    void attach(CLI::App* app) {
        app->add_option("--family", family, "registry family (see `families list`)");
        f0_opt = app->add_option("--f0", f0, "f0(u) expression (default 0)");
        f1_opt = app->add_option("--f1", f1, "f1(u) expression (default 1)");
        phi_opt = app->add_option("--phi", phi, "phi(u) expression");
        std::set<std::string> names;
        for (const auto& info : families::registry())
            for (const auto& [k, v] : info.defaults.items()) names.insert(k);
        for (const auto& n : names) {
            param_opts[n] = app->add_option("--" + n, params[n], "family parameter")->group("Family parameters");
        }
    }

    json family_params() const {
        const auto& reg = families::registry();
        const auto it = std::find_if(reg.begin(), reg.end(), [&](const auto& f) { return f.name == family; });
        if (it == reg.end()) throw UsageError("unknown family '" + family + "'");
        json out = json::object();
        for (const auto& [name, opt] : param_opts) {
            if (opt->count() == 0) continue;
            if (!it->defaults.contains(name)) throw UsageError(family + ": unknown parameter --" + name);
            const std::string& text = params.at(name);
            if (it->defaults[name].is_string()) {
                out[name] = text;
                continue;
            }
            std::string copy = text;
            const std::string err = finite_number(copy);
            if (!err.empty()) throw UsageError("--" + name + ": " + err);
            out[name] = std::stod(text);
        }
        return out;
    }

    bool uses_expressions() const { return f0_opt->count() + f1_opt->count() + phi_opt->count() > 0; }
};

struct Resolved {
    std::optional<families::FamilyInstance> instance;
    TriangularMap triangular;
    PlanarMap planar;
    std::optional<double> u_star;
    json description;
};

Resolved resolve(const MapArgs& m) {
    Resolved r;
    if (!m.family.empty() && m.uses_expressions()) throw UsageError("give either --family or --f0/--f1/--phi, not both");
    if (!m.family.empty()) {
        try {
            r.instance = families::make_family(m.family, m.family_params());
        } catch (const PreconditionError& e) {
            throw UsageError(e.what());
        } catch (const ParseError& e) {
            throw UsageError(e.what());
        }
        r.triangular = r.instance->triangular;
        r.planar = r.instance->planar;
        r.u_star = r.instance->u_star;
        r.description = {{"family", m.family}, {"params", r.instance->params}};
        return r;
    }
    if (m.phi.empty()) throw UsageError("need --family or at least --phi");
    try {
        r.triangular = TriangularMap{ScalarFn::parse(m.f0), ScalarFn::parse(m.f1), ScalarFn::parse(m.phi)};
    } catch (const ParseError& e) {
        throw UsageError(std::string("expression: ") + e.what());
    }
    r.planar = PlanarMap::from(r.triangular);
    r.description = {{"f0", m.f0}, {"f1", m.f1}, {"phi", m.phi}};
    return r;
}

/// Start values: (x0, u0) for maps, initial terms for recurrences.
struct StartArgs {
    double x0 = 0.0;
    double u0 = 0.0;
    double x1 = 0.0;
    double x2 = 0.0;
    std::vector<double> init;
    CLI::Option* x0_opt = nullptr;
    CLI::Option* u0_opt = nullptr;
    CLI::Option* x1_opt = nullptr;
    CLI::Option* x2_opt = nullptr;
    CLI::Option* init_opt = nullptr;

    void attach(CLI::App* app) {
        x0_opt = app->add_option("--x0", x0, "initial x (or first term)")->check(finite_number);
        u0_opt = app->add_option("--u0,--y0", u0, "initial u (or y)")->check(finite_number);
        x1_opt = app->add_option("--x1", x1, "second term of a recurrence")->check(finite_number);
        x2_opt = app->add_option("--x2", x2, "third term of a recurrence")->check(finite_number);
        init_opt = app->add_option("--init", init, "initial terms of a recurrence")->delimiter(',')->check(finite_number);
    }

    std::vector<State> starts(const Resolved& r) const {
        const std::size_t order = r.instance ? r.instance->order : 0;
        if (order == 0) {
            if (x0_opt->count() == 0 || u0_opt->count() == 0) throw UsageError("need --x0 and --u0");
            return {{x0, u0}};
        }
        std::vector<double> terms = init;
        if (init_opt->count() == 0) {
            const CLI::Option* opts[] = {x0_opt, x1_opt, x2_opt};
            const double vals[] = {x0, x1, x2};
            for (std::size_t i = 0; i < std::min<std::size_t>(order, 3); ++i) {
                if (opts[i]->count() == 0) {
                    throw UsageError("recurrence of order " + std::to_string(order) + " needs --x0 .. --x" +
                                     std::to_string(order - 1) + " or --init");
                }
                terms.push_back(vals[i]);
            }
        }
        if (terms.size() != order) throw UsageError("need exactly " + std::to_string(order) + " initial terms");
        try {
            return r.instance->parity_starts(terms);
        } catch (const PreconditionError& e) {
            throw UsageError(e.what());
        }
    }
};

std::optional<double> locate_u_star(const ScalarFn& phi, double u0) {
    double u = u0;
    for (int n = 0; n < 10'000; ++n) {
        const double v = phi(u);
        if (!std::isfinite(v)) return std::nullopt;
        u = v;
    }
    FixedPointOptions fpo;
    const auto fps = find_fixed_points(phi, u - 1.0, u + 1.0, fpo);
    std::optional<double> best;
    for (const auto& fp : fps) {
        if (std::fabs(fp.location - u) < 1e-6 && (!best || std::fabs(fp.location - u) < std::fabs(*best - u))) {
            best = fp.location;
        }
    }
    return best;
}

std::ostream& output(const std::string& path, std::ofstream& file) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open " + path);
    return file;
}

State parse_point(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw UsageError("point must be x,y: " + s);
    std::string a = s.substr(0, comma);
    std::string b = s.substr(comma + 1);
    if (!finite_number(a).empty() || !finite_number(b).empty()) throw UsageError("point must be two finite numbers: " + s);
    return {std::stod(a), std::stod(b)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynamics of triangular maps and the recurrences they reduce"};
    app.require_subcommand(1);

    std::uint64_t seed = acceptance::Options{}.seed;
    int jobs = 0;
    app.add_option("--seed", seed, "seed for randomized suites (FD_SEED overrides)");
    app.add_option("--jobs", jobs, "worker threads for parallel kernels (0: all)")->check(CLI::NonNegativeNumber);

    // simulate
    auto* sim = app.add_subcommand("simulate", "iterate and write the orbit as CSV");
    MapArgs sim_map;
    StartArgs sim_start;
    std::size_t sim_steps = 100;
    double sim_escape = 1e6;
    std::string sim_out;
    sim_map.attach(sim);
    sim_start.attach(sim);
    sim->add_option("--steps,--budget", sim_steps, "iteration budget");
    sim->add_option("--escape", sim_escape, "escape radius on |x| + |u|")->check(finite_number)->check(CLI::PositiveNumber);
    sim->add_option("--out", sim_out, "output file (default stdout)");

    // classify
    auto* cls = app.add_subcommand("classify", "limit regime and limit estimate as JSON");
    MapArgs cls_map;
    StartArgs cls_start;
    std::optional<double> cls_u_star;
    classify::LimitOptions cls_opts;
    double cls_eps = 0.5;
    std::string cls_out;
    cls_map.attach(cls);
    cls_start.attach(cls);
    cls->add_option("--u-star", cls_u_star, "attracting fixed point of phi")->check(finite_number);
    cls->add_option("--tol", cls_opts.tol, "limit tolerance")->check(finite_number)->check(CLI::PositiveNumber);
    cls->add_option("--budget", cls_opts.budget, "iteration budget");
    cls->add_option("--escape", cls_opts.escape_radius, "escape radius")->check(finite_number)->check(CLI::PositiveNumber);
    cls->add_option("--epsilon", cls_eps, "certificate window radius")->check(finite_number)->check(CLI::PositiveNumber);
    cls->add_option("--out", cls_out, "output file (default stdout)");

    // certify
    auto* cert = app.add_subcommand("certify", "check an envelope certificate, JSON output");
    MapArgs cert_map;
    std::optional<double> cert_u_star;
    double cert_eps = 0.5;
    std::vector<double> v_power;
    std::vector<double> w_power;
    std::vector<double> decay_geo;
    std::vector<double> decay_pow;
    std::size_t cert_samples = 256;
    std::string cert_out;
    cert_map.attach(cert);
    cert->add_option("--u-star", cert_u_star, "fiber u* with |f1(u*)| = 1")->check(finite_number);
    cert->add_option("--epsilon", cert_eps, "window radius")->check(finite_number)->check(CLI::PositiveNumber);
    auto* vp = cert->add_option("--V-power", v_power, "V(nu) = C nu^E")->expected(2)->check(finite_number);
    auto* wp = cert->add_option("--W-power", w_power, "W(nu) = C nu^E")->expected(2)->check(finite_number);
    auto* dg = cert->add_option("--decay-geometric", decay_geo, "p_n = S R^n")->expected(2)->check(finite_number);
    auto* dp = cert->add_option("--decay-power", decay_pow, "p_n = S n^-E")->expected(2)->check(finite_number);
    dg->excludes(dp);
    cert->add_option("--samples", cert_samples, "grid samples per side")->check(CLI::Range(64, 1 << 20));
    cert->add_option("--out", cert_out, "output file (default stdout)");

    // basin
    auto* bas = app.add_subcommand("basin", "basin raster (PGM/PPM + JSON) or 1-D interval decomposition");
    MapArgs bas_map;
    std::string bas_mode = "2d";
    std::vector<double> rect{-4, -4, 4, 4};
    std::size_t res = 400;
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::vector<std::string> attractor_text;
    basin::RasterSpec spec;
    std::vector<double> window{-17, 17};
    basin::DecompositionOptions dopts;
    std::string bas_out;
    bool ppm = false;
    bool serial = false;
    bas_map.attach(bas);
    bas->add_option("--mode", bas_mode, "2d raster or 1d decomposition")->check(CLI::IsMember({"2d", "1d"}));
    bas->add_option("--rect", rect, "x_lo y_lo x_hi y_hi")->expected(4)->check(finite_number);
    bas->add_option("--res", res, "cells per side")->check(CLI::Range(2, 20000));
    bas->add_option("--nx", nx, "columns (overrides --res)")->check(CLI::Range(2, 20000));
    bas->add_option("--ny", ny, "rows (overrides --res)")->check(CLI::Range(2, 20000));
    bas->add_option("--attractor", attractor_text, "attracting point x,y (repeatable; default 0,0)");
    bas->add_option("--budget", spec.budget, "iterations per cell");
    bas->add_option("--escape", spec.escape_radius, "escape radius")->check(finite_number)->check(CLI::PositiveNumber);
    bas->add_option("--tol", spec.tol, "attractor capture distance")->check(finite_number)->check(CLI::PositiveNumber);
    bas->add_option("--window", window, "1-D window lo hi")->expected(2)->check(finite_number);
    bas->add_option("--depth", dopts.depth, "preimage generations")->check(CLI::Range(1, 64));
    bas->add_option("--out", bas_out, "output prefix (2d: PREFIX.pgm + PREFIX.json; 1d: JSON file)");
    bas->add_flag("--ppm", ppm, "also write PREFIX.ppm");
    bas->add_flag("--serial", serial, "use the serial reference raster");

    // families
    auto* fam = app.add_subcommand("families", "family registry");
    auto* fam_list = fam->add_subcommand("list", "print the registry as JSON");
    fam->require_subcommand(1);

    // verify
    auto* ver = app.add_subcommand("verify", "run the acceptance suite");
    std::vector<int> only;
    ver->add_option("--only", only, "criterion numbers to run")->check(CLI::Range(1, acceptance::kCriteria));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (const char* env = std::getenv("FD_SEED")) {
        try {
            std::size_t pos = 0;
            seed = std::stoull(env, &pos);
            if (pos != std::string(env).size()) throw std::invalid_argument(env);
        } catch (const std::exception&) {
            std::cerr << "FD_SEED must be a non-negative integer\n";
            return 2;
        }
    }

    try {
        if (*sim) {
            const auto r = resolve(sim_map);
            const auto starts = sim_start.starts(r);
            std::ofstream file;
            auto& out = output(sim_out, file);
            for (std::size_t i = 0; i < starts.size(); ++i) {
                if (starts.size() > 1) out << "# subsequence " << i << '\n';
                const auto trace = r.instance && r.instance->order == 0
                                       ? iterate(r.planar, starts[i], {sim_steps, sim_escape, true})
                                       : iterate(r.triangular, starts[i], {sim_steps, sim_escape, true});
                write_csv(out, trace);
            }
            return 0;
        }

        if (*cls) {
            const auto r = resolve(cls_map);
            const auto starts = cls_start.starts(r);
            std::optional<double> u_star = cls_u_star ? cls_u_star : r.u_star;
            if (!u_star) u_star = locate_u_star(r.triangular.phi, starts.front().u);
            if (!u_star) {
                std::cerr << "no attracting fixed point of phi found along the orbit; pass --u-star\n";
                return 1;
            }
            json doc = r.description;
            doc["u_star"] = *u_star;
            std::optional<fecld::FecldCertificate> c;
            try {
                if (classify::classify_regime(r.triangular, *u_star) == classify::Regime::fixed_point_fiber) {
                    c = classify::auto_certificate(r.triangular, *u_star, cls_eps);
                }
            } catch (const PreconditionError& e) {
                throw UsageError(e.what());
            }
            doc["certificate"] = c ? json(fecld::to_string(c->verdict)) : json(nullptr);
            json reports = json::array();
            json limits = json::array();
            json start_list = json::array();
            for (const auto& s : starts) {
                const auto rep = classify::estimate_limit(r.triangular, s, *u_star, c, cls_opts);
                reports.push_back(classify::to_json(rep));
                limits.push_back(rep.limit ? json(*rep.limit) : json(nullptr));
                start_list.push_back({s.x, s.u});
                if (doc.find("regime") == doc.end()) doc["regime"] = classify::to_string(rep.regime);
            }
            doc["starts"] = start_list;
            doc["reports"] = reports;
            doc["limits"] = limits;
            if (starts.size() > 1) {
                doc["subsequences"] = starts.size();
                bool all = true;
                double prod = 1.0;
                double sum = 0.0;
                for (const auto& l : limits) {
                    if (l.is_null()) {
                        all = false;
                        break;
                    }
                    prod *= l.get<double>();
                    sum += l.get<double>();
                }
                doc["limit_product"] = all ? json(prod) : json(nullptr);
                doc["limit_sum"] = all ? json(sum) : json(nullptr);
            }
            std::ofstream file;
            output(cls_out, file) << doc.dump(2) << '\n';
            return 0;
        }

        if (*cert) {
            const auto r = resolve(cert_map);
            const std::optional<double> u_star = cert_u_star ? cert_u_star : r.u_star;
            if (!u_star) throw UsageError("need --u-star");
            fecld::EnvelopeSpec env;
            const bool custom = vp->count() + wp->count() + dg->count() + dp->count() > 0;
            try {
                if (!custom) {
                    env = fecld::hyperbolic_envelope(r.triangular, *u_star, cert_eps);
                } else {
                    if (dg->count() + dp->count() == 0) throw UsageError("custom envelope needs --decay-geometric or --decay-power");
                    env.V = v_power.empty() ? fecld::Envelope::zero() : fecld::Envelope::power(v_power[0], v_power[1]);
                    env.W = w_power.empty() ? fecld::Envelope::zero() : fecld::Envelope::power(w_power[0], w_power[1]);
                    env.epsilon = cert_eps;
                    env.p = dg->count() ? fecld::DecaySequence::geometric(decay_geo[0], decay_geo[1])
                                        : fecld::DecaySequence::power_law(decay_pow[0], decay_pow[1]);
                }
                fecld::CertificateOptions co;
                co.samples = cert_samples;
                co.parallel = {Execution::parallel, jobs};
                const auto result = fecld::check_certificate(r.triangular, *u_star, env, co);
                std::ofstream file;
                output(cert_out, file) << fecld::to_json(result).dump(2) << '\n';
            } catch (const PreconditionError& e) {
                throw UsageError(e.what());
            }
            return 0;
        }

        if (*bas) {
            const auto r = resolve(bas_map);
            if (bas_mode == "1d") {
                if (!(window[0] < window[1])) throw UsageError("--window needs lo < hi");
                const auto d = basin::decompose_1d(r.triangular.phi, window[0], window[1], dopts);
                std::ofstream file;
                output(bas_out, file) << basin::to_json(d).dump(2) << '\n';
                return 0;
            }
            if (bas_out.empty()) throw UsageError("2d mode needs --out PREFIX");
            spec.x_lo = rect[0];
            spec.y_lo = rect[1];
            spec.x_hi = rect[2];
            spec.y_hi = rect[3];
            spec.nx = nx ? nx : res;
            spec.ny = ny ? ny : res;
            for (const auto& a : attractor_text) spec.attractors.push_back(parse_point(a));
            if (spec.attractors.empty()) spec.attractors.push_back({0.0, 0.0});
            try {
                basin::validate(spec);
            } catch (const PreconditionError& e) {
                throw UsageError(e.what());
            }
            const auto grid = serial ? basin::rasterize_2d_serial(r.planar, spec)
                                     : basin::rasterize_2d(r.planar, spec, {Execution::parallel, jobs});
            {
                std::ofstream f(bas_out + ".pgm", std::ios::binary);
                basin::write_pgm(f, grid);
            }
            if (ppm) {
                std::ofstream f(bas_out + ".ppm", std::ios::binary);
                basin::write_ppm(f, grid);
            }
            auto side = basin::sidecar_json(grid);
            side["map"] = r.description;
            std::ofstream(bas_out + ".json") << side.dump(2) << '\n';
            return 0;
        }

        if (*fam_list) {
            json out = json::array();
            for (const auto& f : families::registry()) {
                out.push_back({{"name", f.name}, {"summary", f.summary}, {"origin", f.origin}, {"defaults", f.defaults}});
            }
            std::cout << out.dump(2) << '\n';
            return 0;
        }

        if (*ver) {
            acceptance::Options o;
            o.seed = seed;
            o.jobs = static_cast<std::size_t>(jobs);
            std::vector<acceptance::Result> results;
            if (only.empty()) {
                results = acceptance::run_all(o);
            } else {
                for (int id : only) results.push_back(acceptance::run(id, o));
            }
            return acceptance::report(std::cout, results) ? 0 : 1;
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
