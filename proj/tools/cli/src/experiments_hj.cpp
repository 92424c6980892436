#include <cmath>
#include <optional>

#include "multitime/errors.hpp"
#include "multitime_cli/config.hpp"
#include "multitime_cli/worker_pool.hpp"

namespace multitime::cli {

namespace {

using hj::ConfigurationPoint;
using hj::HamiltonianFunctionSet;
using hj::HJFunction;

struct SingleTime {
    std::string s;
    std::string h;
};

struct HJSystem {
    std::size_t n = 1;
    std::size_t d = 1;
    std::vector<double> masses;
    std::optional<HJFunction> s;
    std::optional<HamiltonianFunctionSet> hs;
    std::optional<SingleTime> single;
    double step = 0.0;
};

template <class F>
auto guarded(const ObjectReader& r, const std::string& key, F&& f) {
    try {
        return f();
    } catch (const NumericalError&) {
        throw;
    } catch (const Error& e) {
        r.fail(key, e.what());
    }
}

HJSystem read_system(ObjectReader& r) {
    HJSystem sys;
    sys.n = r.required<std::size_t>("particles");
    sys.d = r.optional<std::size_t>("dim", 1);
    if (sys.n == 0) r.fail("particles", "expected at least one particle");
    if (sys.d < 1 || sys.d > 3) r.fail("dim", "dim must be 1, 2 or 3");
    sys.masses = r.optional<std::vector<double>>("masses", std::vector<double>(sys.n, 1.0));
    if (sys.masses.size() != sys.n) r.fail("masses", "expected one mass per particle");
    for (double m : sys.masses) {
        if (!(m > 0.0)) r.fail("masses", "masses must be positive");
    }
    sys.step = r.optional<double>("step", 0.0);
    if (sys.step < 0.0) r.fail("step", "step must be non-negative (0 selects the default)");
    if (r.has("S")) {
        const auto src = r.required<std::string>("S");
        sys.s.emplace(guarded(r, "S", [&] { return HJFunction(sys.n, sys.d, sys.masses, src, sys.step); }));
    }
    if (r.has("partials")) {
        const auto partials = r.required<std::vector<std::string>>("partials");
        const auto total = r.maybe<std::string>("total");
        sys.hs.emplace(guarded(r, "partials", [&] {
            return HamiltonianFunctionSet(sys.n, sys.d, partials, total, sys.step);
        }));
    } else if (r.has("total")) {
        r.fail("total", "'total' requires 'partials'");
    }
    if (r.has("single_time")) {
        ObjectReader st = r.object("single_time");
        sys.single = SingleTime{st.required<std::string>("S"), st.required<std::string>("H")};
        r.attach("single_time", st.finish());
    }
    return sys;
}

std::vector<ConfigurationPoint> read_configuration_points(ObjectReader& e, const HJSystem& sys, bool required) {
    std::vector<ConfigurationPoint> out;
    if (!e.has("points")) {
        if (required) e.fail("points", "missing required key 'points'");
        return out;
    }
    json echo = json::array();
    for (auto& r : e.objects("points")) {
        const auto p = read_phase_point(r, sys.n, sys.d, false);
        out.push_back({p.times, p.positions});
        echo.push_back(r.finish());
    }
    e.attach("points", std::move(echo));
    return out;
}

std::vector<std::vector<double>> read_positions(ObjectReader& e, const std::string& key, const HJSystem& sys) {
    const auto x = e.required<std::vector<std::vector<double>>>(key);
    if (x.size() != sys.n) e.fail(key, "expected " + std::to_string(sys.n) + " particles");
    for (const auto& row : x) {
        if (row.size() != sys.d) e.fail(key, "expected " + std::to_string(sys.d) + " components per particle");
    }
    return x;
}

hj::Foliation read_foliation(ObjectReader& r, const HJSystem& sys, std::size_t index) {
    hj::Foliation f;
    f.id = r.optional<std::string>("id", "foliation_" + std::to_string(index + 1));
    f.u = r.required<std::vector<double>>("u");
    if (f.u.size() != sys.d) r.fail("u", "expected " + std::to_string(sys.d) + " components");
    double u2 = 0.0;
    for (double c : f.u) u2 += c * c;
    if (!(u2 < 1.0)) r.fail("u", "boost velocity must satisfy |u| < 1");
    return f;
}

// Phase point (t, x, grad_x S) at a configuration point.
classical::PhasePoint lift(const HJFunction& s, const ConfigurationPoint& c) {
    const auto z = s.pack(c);
    classical::PhasePoint p{c.times, c.positions, c.positions};
    for (std::size_t j = 0; j < s.particles(); ++j) {
        for (std::size_t k = 0; k < s.dim(); ++k) p.momenta[j][k] = s.derivative(s.layout().position(j, k), z);
    }
    return p;
}

json pair_defects(const HamiltonianFunctionSet& hs, const classical::PhasePoint& p, double h, double flow_h) {
    const auto report = hj::hj_consistency_defect(hs, p, h);
    json pairs = json::array();
    for (const auto& d : report.pairs) {
        pairs.push_back({{"j", d.j + 1}, {"k", d.k + 1}, {"defect", d.value},
                         {"flow_norm", hj::defect_flow_norm(hs, p, d.j, d.k, flow_h)}});
    }
    return pairs;
}

// ---------------------------------------------------------------------------

Runner residuals(HJSystem sys, ObjectReader& e) {
    if (!sys.s && !sys.single) e.fail("kind", "hj-residual needs 'S' or 'single_time' in the system");
    if (!sys.s && e.has("points")) e.fail("points", "multi-time points need 'S' in the system");
    const auto points = read_configuration_points(e, sys, sys.s && !sys.single);
    const double h2 = e.optional<double>("h", hj::kDefaultSecondOrderStep);
    if (!(h2 > 0.0)) e.fail("h", "h must be positive");
    std::vector<std::pair<double, std::vector<std::vector<double>>>> single_points;
    if (sys.single) {
        json echo = json::array();
        for (auto& r : e.objects("single_time_points")) {
            const double t = r.required<double>("t");
            single_points.emplace_back(t, read_positions(r, "positions", sys));
            echo.push_back(r.finish());
        }
        e.attach("single_time_points", std::move(echo));
    }
    return [sys = std::move(sys), points, h2, single_points](const RunContext& ctx) {
        struct Row {
            std::optional<std::vector<double>> residuals;
            hj::VelocityDefect velocity;
            json pairs;
            std::optional<double> sum_gap;
        };
        auto rows = parallel_map(points.size(), ctx.jobs, [&](std::size_t i) {
            Row row;
            row.velocity = hj::hj_velocity_consistency_defect(*sys.s, points[i], h2);
            if (sys.hs) {
                row.residuals = hj::hj_residual_multi(*sys.s, *sys.hs, points[i]);
                const auto lifted = lift(*sys.s, points[i]);
                row.pairs = pair_defects(*sys.hs, lifted, sys.step, h2);
                if (sys.hs->total()) row.sum_gap = hj::equal_time_sum_gap(*sys.hs, lifted);
            }
            return row;
        });
        Outcome out;
        CsvTable csv{"hj_residual", {"point"}, {}};
        for (std::size_t j = 0; j < sys.n; ++j) csv.columns.push_back("R" + std::to_string(j + 1));
        for (const char* c : {"velocity_defect", "smoothness"}) csv.columns.push_back(c);
        json table = json::array();
        double max_residual = 0.0;
        double max_velocity = 0.0;
        bool warned = false;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const Row& r = rows[i];
            json entry{{"times", points[i].times}, {"positions", points[i].positions},
                       {"velocity_defect", r.velocity.value}, {"smoothness", r.velocity.smoothness},
                       {"smoothness_warning", r.velocity.smoothness_warning}};
            std::vector<std::string> line{format_number(i)};
            if (r.residuals) {
                entry["residuals"] = *r.residuals;
                entry["poisson_defects"] = r.pairs;
                for (double v : *r.residuals) {
                    max_residual = std::max(max_residual, v);
                    line.push_back(format_number(v));
                }
                if (r.sum_gap) entry["equal_time_sum_gap"] = *r.sum_gap;
            } else {
                for (std::size_t j = 0; j < sys.n; ++j) line.emplace_back();
            }
            line.push_back(format_number(r.velocity.value));
            line.push_back(format_number(r.velocity.smoothness));
            csv.add(std::move(line));
            max_velocity = std::max(max_velocity, r.velocity.value);
            warned = warned || r.velocity.smoothness_warning;
            table.push_back(std::move(entry));
        }
        out.results = {{"points", table}, {"max_velocity_defect", max_velocity}, {"smoothness_warning", warned}};
        if (sys.hs) out.results["max_residual"] = max_residual;
        if (sys.single) {
            json single = json::array();
            double worst = 0.0;
            for (const auto& [t, x] : single_points) {
                const double r = hj::hj_residual_single(sys.single->s, sys.single->h, sys.d, t, x, sys.step);
                worst = std::max(worst, r);
                single.push_back({{"t", t}, {"positions", x}, {"residual", r}});
            }
            out.results["single_time"] = {{"points", single}, {"max_residual", worst}};
        }
        out.csv = std::move(csv);
        return out;
    };
}

Runner poisson(HJSystem sys, ObjectReader& e) {
    if (!sys.hs) e.fail("kind", "defect-grid needs 'partials' in the system");
    std::vector<classical::PhasePoint> points;
    json echo = json::array();
    for (auto& r : e.objects("points")) {
        points.push_back(read_phase_point(r, sys.n, sys.d));
        echo.push_back(r.finish());
    }
    if (points.empty()) e.fail("points", "expected at least one point");
    e.attach("points", std::move(echo));
    const double h2 = e.optional<double>("flow_h", hj::kDefaultSecondOrderStep);
    if (!(h2 > 0.0)) e.fail("flow_h", "flow_h must be positive");
    return [sys = std::move(sys), points, h2](const RunContext& ctx) {
        auto rows = parallel_map(points.size(), ctx.jobs, [&](std::size_t i) {
            json entry{{"times", points[i].times}, {"positions", points[i].positions},
                       {"momenta", points[i].momenta}, {"pairs", pair_defects(*sys.hs, points[i], sys.step, h2)}};
            if (sys.hs->total()) entry["equal_time_sum_gap"] = hj::equal_time_sum_gap(*sys.hs, points[i]);
            return entry;
        });
        Outcome out;
        CsvTable csv{"poisson_defects", {"point", "j", "k", "defect", "flow_norm"}, {}};
        double worst = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (const auto& p : rows[i]["pairs"]) {
                worst = std::max(worst, p["defect"].get<double>());
                csv.add({format_number(i), format_number(p["j"].get<std::size_t>()),
                         format_number(p["k"].get<std::size_t>()), format_number(p["defect"].get<double>()),
                         format_number(p["flow_norm"].get<double>())});
            }
        }
        out.results = {{"points", rows}, {"max_defect", worst},
                       {"h", sys.step > 0.0 ? json(sys.step) : json("default")}};
        out.csv = std::move(csv);
        return out;
    };
}

struct RunSpec {
    std::vector<std::vector<double>> init;
    double s0 = 0.0;
    double span = 1.0;
    double ds = 1e-2;
};

RunSpec read_run(ObjectReader& e, const HJSystem& sys) {
    RunSpec r;
    r.init = read_positions(e, "initial", sys);
    r.s0 = e.optional<double>("s0", 0.0);
    r.span = e.required<double>("span");
    r.ds = e.optional<double>("ds", 1e-2);
    if (!(r.span > 0.0) || !(r.ds > 0.0)) e.fail("", "span and ds must be positive");
    return r;
}

Runner trajectories(HJSystem sys, ObjectReader& e) {
    if (!sys.s) e.fail("kind", "trajectories needs 'S' in the system");
    ObjectReader f = e.object("foliation");
    const auto fol = read_foliation(f, sys, 0);
    e.attach("foliation", f.finish());
    const RunSpec run = read_run(e, sys);
    return [sys = std::move(sys), fol, run](const RunContext&) {
        const auto path = hj::hj_trajectories_foliation(*sys.s, fol, run.init, run.s0, run.span, run.ds);
        json lines = json::array();
        for (const auto& line : path.lines) {
            lines.push_back({{"t_begin", line.t_begin()}, {"t_end", line.t_end()}, {"samples", line.size()}});
        }
        Outcome out;
        out.results = {{"foliation", fol.id}, {"world_lines", lines},
                       {"chord_deviation", classical::chord_deviation(path)}};
        out.csv = npath_table(path);
        return out;
    };
}

Runner compare(HJSystem sys, ObjectReader& e) {
    if (!sys.s) e.fail("kind", "foliation-compare needs 'S' in the system");
    std::vector<hj::Foliation> foliations;
    json echo = json::array();
    auto readers = e.objects("foliations");
    for (std::size_t i = 0; i < readers.size(); ++i) {
        foliations.push_back(read_foliation(readers[i], sys, i));
        echo.push_back(readers[i].finish());
    }
    e.attach("foliations", std::move(echo));
    if (foliations.size() < 2) e.fail("foliations", "need >= 2 foliations");
    const RunSpec run = read_run(e, sys);
    const auto grid_points = e.optional<std::size_t>("grid_points", 201);
    if (grid_points < 2) e.fail("grid_points", "need at least two grid points");
    const double threshold = e.optional<double>("threshold", 1e-6);
    return [sys = std::move(sys), foliations, run, grid_points, threshold](const RunContext& ctx) {
        auto paths = parallel_map(foliations.size(), ctx.jobs, [&](std::size_t i) {
            return hj::hj_trajectories_foliation(*sys.s, foliations[i], run.init, run.s0, run.span, run.ds);
        });
        const std::size_t m = paths.size();
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t b = a + 1; b < m; ++b) pairs.emplace_back(a, b);
        }
        auto dists = parallel_map(pairs.size(), ctx.jobs, [&](std::size_t i) {
            return hj::npath_distance(paths[pairs[i].first], paths[pairs[i].second], grid_points);
        });
        std::vector<std::vector<double>> matrix(m, std::vector<double>(m, 0.0));
        bool independent = true;
        CsvTable csv{"foliation_distances", {"a", "b", "distance"}, {}};
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const auto [a, b] = pairs[i];
            matrix[a][b] = matrix[b][a] = dists[i];
            independent = independent && dists[i] < threshold;
            csv.add({foliations[a].id, foliations[b].id, format_number(dists[i])});
        }
        std::vector<std::string> ids;
        for (const auto& f : foliations) ids.push_back(f.id);
        Outcome out;
        out.results = {{"ids", ids}, {"distance", matrix}, {"foliation_independent", independent},
                       {"threshold", threshold}, {"grid_points", grid_points},
                       {"distance_definition", "sup over particles and a common time grid of |x_j^A(t) - x_j^B(t)|"}};
        out.csv = std::move(csv);
        return out;
    };
}

}  // namespace

Runner prepare_hj(ObjectReader& system, ObjectReader& experiment, const std::string& kind, json& system_echo,
                  json& experiment_echo) {
    HJSystem sys = read_system(system);
    system_echo = system.finish();
    Runner run;
    if (kind == "hj-residual") run = residuals(std::move(sys), experiment);
    else if (kind == "defect-grid") run = poisson(std::move(sys), experiment);
    else if (kind == "trajectories") run = trajectories(std::move(sys), experiment);
    else if (kind == "foliation-compare") run = compare(std::move(sys), experiment);
    else experiment.fail("kind", "experiment kind '" + kind + "' is not available for the hj formalism");
    experiment_echo = experiment.finish();
    return run;
}

}  // namespace multitime::cli
