#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <sstream>

#include "multitime/errors.hpp"
#include "multitime_cli/config.hpp"
#include "multitime_cli/worker_pool.hpp"

namespace multitime::cli {

namespace {

using classical::HamiltonianFunction;
using classical::NPath;
using classical::PhasePoint;
using classical::PhaseVectorField;

struct Shape {
    std::size_t n = 1;
    std::size_t d = 1;
    std::vector<double> masses;
    double step = 0.0;
};

// A Hamiltonian block: {"terms": [...], "gradients": {"x1_1": "..."}}.
struct HamiltonianSpec {
    std::vector<std::string> terms;
    std::map<std::string, std::string> gradients;

    std::string combined() const {
        std::string out;
        for (const auto& t : terms) out += (out.empty() ? "(" : " + (") + t + ")";
        return out;
    }
};

HamiltonianSpec read_hamiltonian(ObjectReader& r) {
    HamiltonianSpec spec;
    spec.terms = r.required<std::vector<std::string>>("terms");
    if (spec.terms.empty()) r.fail("terms", "expected at least one term");
    if (r.has("gradients")) {
        const json& g = r.raw("gradients");
        const std::string p = pointer_join(r.pointer(), "gradients");
        if (!g.is_object()) throw ConfigError(p, "expected an object mapping variable names to expressions");
        for (auto it = g.begin(); it != g.end(); ++it) {
            spec.gradients[it.key()] = json_string(it.value(), pointer_join(p, it.key()));
        }
    } else {
        r.set_echo("gradients", json::object());
    }
    return spec;
}

HamiltonianFunction build_hamiltonian(const HamiltonianSpec& spec, const Shape& shape, const ObjectReader& r,
                                      const std::string& key) {
    try {
        return HamiltonianFunction(VariableLayout(shape.n, shape.d), spec.terms, spec.gradients, shape.step);
    } catch (const NumericalError&) {
        throw;
    } catch (const Error& e) {
        r.fail(key, e.what());
    }
}

PhaseVectorField build_field(ObjectReader& r, const Shape& shape, const std::vector<double>& masses) {
    const auto v = r.required<std::vector<std::vector<std::string>>>("velocity");
    const auto w = r.required<std::vector<std::vector<std::string>>>("force");
    try {
        return PhaseVectorField::from_expressions(shape.n, shape.d, masses, v, w);
    } catch (const NumericalError&) {
        throw;
    } catch (const Error& e) {
        r.fail("", e.what());
    }
}

struct ClassicalSystem {
    Shape shape;
    std::optional<PhaseVectorField> field;
    std::optional<HamiltonianFunction> hamiltonian;
    std::vector<HamiltonianSpec> partial_specs;
    std::vector<HamiltonianFunction> partials;
    std::vector<classical::CjsMember> family;
};

ClassicalSystem read_system(ObjectReader& s) {
    ClassicalSystem sys;
    Shape& shape = sys.shape;
    shape.n = s.required<std::size_t>("particles");
    shape.d = s.optional<std::size_t>("dim", 1);
    if (shape.n == 0) s.fail("particles", "expected at least one particle");
    if (shape.d < 1 || shape.d > 3) s.fail("dim", "dim must be 1, 2 or 3");
    shape.masses = s.optional<std::vector<double>>("masses", std::vector<double>(shape.n, 1.0));
    if (shape.masses.size() != shape.n) s.fail("masses", "expected one mass per particle");
    for (double m : shape.masses) {
        if (!(m > 0.0)) s.fail("masses", "masses must be positive");
    }
    shape.step = s.optional<double>("step", 0.0);
    if (shape.step < 0.0) s.fail("step", "step must be non-negative (0 selects the default)");

    int sources = 0;
    if (s.has("field")) {
        ++sources;
        ObjectReader f = s.object("field");
        sys.field.emplace(build_field(f, shape, shape.masses));
        s.attach("field", f.finish());
    }
    if (s.has("hamiltonian")) {
        ++sources;
        ObjectReader h = s.object("hamiltonian");
        const auto spec = read_hamiltonian(h);
        sys.hamiltonian.emplace(build_hamiltonian(spec, shape, h, "terms"));
        sys.field.emplace(classical::hamiltonian_vector_field(*sys.hamiltonian, shape.masses));
        s.attach("hamiltonian", h.finish());
    }
    if (s.has("partials")) {
        ++sources;
        json echo = json::array();
        for (auto& r : s.objects("partials")) {
            sys.partial_specs.push_back(read_hamiltonian(r));
            sys.partials.push_back(build_hamiltonian(sys.partial_specs.back(), shape, r, "terms"));
            echo.push_back(r.finish());
        }
        if (sys.partials.size() != shape.n) s.fail("partials", "expected one partial Hamiltonian per particle");
        s.attach("partials", std::move(echo));
    }
    if (s.has("family")) {
        ++sources;
        json echo = json::array();
        for (auto& r : s.objects("family")) {
            const auto id = r.required<std::string>("id");
            const auto masses = r.optional<std::vector<double>>("masses", shape.masses);
            if (masses.size() != shape.n) r.fail("masses", "expected one mass per particle");
            if (r.has("hamiltonian")) {
                ObjectReader h = r.object("hamiltonian");
                const auto spec = read_hamiltonian(h);
                const auto hf = build_hamiltonian(spec, shape, h, "terms");
                sys.family.push_back({id, classical::hamiltonian_vector_field(hf, masses)});
                r.attach("hamiltonian", h.finish());
            } else {
                sys.family.push_back({id, build_field(r, shape, masses)});
            }
            echo.push_back(r.finish());
        }
        if (sys.family.empty()) s.fail("family", "expected at least one member");
        s.attach("family", std::move(echo));
    }
    if (sources != 1) s.fail("", "exactly one of 'field', 'hamiltonian', 'partials', 'family' is required");
    return sys;
}

PhasePoint read_initial(ObjectReader& parent, const Shape& shape) {
    ObjectReader r = parent.object("initial");
    const double t = r.optional<double>("t", 0.0);
    const auto x = r.required<std::vector<std::vector<double>>>("positions");
    const auto p = r.required<std::vector<std::vector<double>>>("momenta");
    auto check = [&](const std::vector<std::vector<double>>& rows, const char* key) {
        if (rows.size() != shape.n) r.fail(key, "expected " + std::to_string(shape.n) + " particles");
        for (const auto& row : rows) {
            if (row.size() != shape.d) r.fail(key, "expected " + std::to_string(shape.d) + " components per particle");
        }
    };
    check(x, "positions");
    check(p, "momenta");
    parent.attach("initial", r.finish());
    return PhasePoint::equal_time(t, x, p);
}

std::vector<PhasePoint> read_phase_points(ObjectReader& e, const Shape& shape) {
    std::vector<PhasePoint> points;
    if (e.has("points")) {
        json echo = json::array();
        for (auto& r : e.objects("points")) {
            points.push_back(read_phase_point(r, shape.n, shape.d));
            echo.push_back(r.finish());
        }
        e.attach("points", std::move(echo));
    }
    if (e.has("random")) {
        ObjectReader r = e.object("random");
        const auto count = r.optional<std::size_t>("count", 1000);
        const auto seed = r.optional<std::uint64_t>("seed", 1);
        const double tr = r.optional<double>("time_range", 1.0);
        const double xr = r.optional<double>("position_range", 2.0);
        const double pr = r.optional<double>("momentum_range", 1.0);
        std::mt19937_64 rng(seed);
        for (std::size_t i = 0; i < count; ++i) {
            PhasePoint p;
            p.times.resize(shape.n);
            p.positions.assign(shape.n, std::vector<double>(shape.d));
            p.momenta.assign(shape.n, std::vector<double>(shape.d));
            for (std::size_t j = 0; j < shape.n; ++j) {
                p.times[j] = uniform_draw(rng(), -tr, tr);
                for (std::size_t c = 0; c < shape.d; ++c) p.positions[j][c] = uniform_draw(rng(), -xr, xr);
                for (std::size_t c = 0; c < shape.d; ++c) p.momenta[j][c] = uniform_draw(rng(), -pr, pr);
            }
            points.push_back(std::move(p));
        }
        e.attach("random", r.finish());
    }
    if (points.empty()) e.fail("points", "need 'points' and/or 'random'");
    return points;
}

json phase_point_json(const PhasePoint& p) {
    return {{"times", p.times}, {"positions", p.positions}, {"momenta", p.momenta}};
}

void require(const ObjectReader& e, bool ok, const std::string& what) {
    if (!ok) e.fail("kind", what);
}

// ---------------------------------------------------------------------------

Runner defect_grid(ClassicalSystem sys, ObjectReader& e) {
    require(e, sys.field.has_value(), "defect-grid needs a 'field' or 'hamiltonian' system");
    const auto points = read_phase_points(e, sys.shape);
    const double h = e.optional<double>("h", classical::kDefaultDirectionalStep);
    if (!(h > 0.0)) e.fail("h", "h must be positive");
    return [field = std::move(*sys.field), points, h](const RunContext& ctx) {
        auto reports = parallel_map(points.size(), ctx.jobs, [&](std::size_t i) {
            return classical::classical_consistency_defect(field, points[i], h);
        });
        const std::size_t n = field.particles();
        std::vector<std::vector<double>> pair_max(n, std::vector<double>(n, 0.0));
        double worst = 0.0;
        std::size_t worst_index = 0;
        CsvTable csv{"defects", {"point", "j", "k", "defect"}, {}};
        for (std::size_t i = 0; i < reports.size(); ++i) {
            for (const auto& p : reports[i].pairs) {
                pair_max[p.j][p.k] = std::max(pair_max[p.j][p.k], p.value);
                csv.add({format_number(i), format_number(p.j + 1), format_number(p.k + 1), format_number(p.value)});
            }
            if (reports[i].max > worst) {
                worst = reports[i].max;
                worst_index = i;
            }
        }
        json pairs = json::array();
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k = 0; k < n; ++k) {
                if (j != k) pairs.push_back({{"j", j + 1}, {"k", k + 1}, {"max_defect", pair_max[j][k]}});
            }
        }
        Outcome out;
        out.results = {{"points", points.size()}, {"pairs", pairs}, {"max_defect", worst}, {"h", h},
                       {"worst_point", phase_point_json(points[worst_index])}};
        out.csv = std::move(csv);
        return out;
    };
}

Runner equal_time(ClassicalSystem sys, ObjectReader& e) {
    require(e, sys.field.has_value(), "equal-time-evolve needs a 'field' or 'hamiltonian' system");
    const PhasePoint init = read_initial(e, sys.shape);
    const double span = e.required<double>("span");
    const double dt = e.optional<double>("dt", 1e-2);
    if (!(span > 0.0) || !(dt > 0.0)) e.fail("", "span and dt must be positive");
    return [sys = std::move(sys), init, span, dt](const RunContext&) {
        const NPath path = classical::evolve_equal_time(*sys.field, init, span, dt);
        Outcome out;
        json finals = json::array();
        for (const auto& line : path.lines) {
            const std::size_t last = line.size() - 1;
            finals.push_back({{"t", line.times()[last]},
                              {"position", std::vector<double>(line.sample_position(last).begin(), line.sample_position(last).end())},
                              {"momentum", std::vector<double>(line.sample_momentum(last).begin(), line.sample_momentum(last).end())}});
        }
        out.results = {{"samples_per_particle", path.lines.front().size()},
                       {"final", finals},
                       {"chord_deviation", classical::chord_deviation(path)},
                       {"warnings", path.warnings}};
        if (sys.hamiltonian) {
            const VariableLayout layout(sys.shape.n, sys.shape.d);
            PhasePoint last = init;
            for (std::size_t j = 0; j < sys.shape.n; ++j) {
                const auto& line = path.lines[j];
                const std::size_t i = line.size() - 1;
                last.times[j] = line.times()[i];
                last.positions[j].assign(line.sample_position(i).begin(), line.sample_position(i).end());
                last.momenta[j].assign(line.sample_momentum(i).begin(), line.sample_momentum(i).end());
            }
            const double e0 = (*sys.hamiltonian)(classical::pack(layout, init));
            const double e1 = (*sys.hamiltonian)(classical::pack(layout, last));
            out.results["energy"] = {{"initial", e0}, {"final", e1}, {"drift", std::fabs(e1 - e0)}};
        }
        out.csv = npath_table(path);
        return out;
    };
}

Runner validity(ClassicalSystem sys, ObjectReader& e) {
    require(e, sys.field.has_value(), "validity needs a 'field' or 'hamiltonian' system");
    const std::size_t n = sys.shape.n;
    const PhasePoint init = read_initial(e, sys.shape);
    const double span = e.required<double>("span");
    const double dt = e.optional<double>("dt", 1e-2);
    if (!(span > 0.0) || !(dt > 0.0)) e.fail("", "span and dt must be positive");
    std::vector<std::vector<double>> samples;
    if (e.has("samples")) {
        samples = e.required<std::vector<std::vector<double>>>("samples");
        for (const auto& s : samples) {
            if (s.size() != n) e.fail("samples", "each sample needs " + std::to_string(n) + " times");
        }
    }
    if (e.has("random")) {
        ObjectReader r = e.object("random");
        const double t0 = init.times.front();
        const auto count = r.optional<std::size_t>("count", 100);
        const auto seed = r.optional<std::uint64_t>("seed", 1);
        const auto window = r.optional<std::vector<double>>("window", {t0 + 0.25 * span, t0 + 0.75 * span});
        if (window.size() != 2 || !(window[0] <= window[1])) r.fail("window", "expected [lo, hi] with lo <= hi");
        const double offset = r.optional<double>("max_offset", 0.5);
        const auto mode = r.optional<std::string>("offset_mode", "uniform");
        if (mode != "uniform" && mode != "fixed") r.fail("offset_mode", "expected 'uniform' or 'fixed'");
        std::mt19937_64 rng(seed);
        for (std::size_t i = 0; i < count; ++i) {
            const double centre = uniform_draw(rng(), window[0], window[1]);
            std::vector<double> t(n);
            for (std::size_t j = 0; j < n; ++j) {
                if (mode == "fixed") {
                    // Alternating +-offset/2 around the centre; sign drawn per sample.
                    const double sign = (rng() >> 63) ? 1.0 : -1.0;
                    t[j] = centre + sign * ((j % 2 == 0) ? 0.5 : -0.5) * offset;
                } else {
                    t[j] = centre + uniform_draw(rng(), -0.5 * offset, 0.5 * offset);
                }
            }
            samples.push_back(std::move(t));
        }
        e.attach("random", r.finish());
    }
    if (samples.empty()) e.fail("samples", "need 'samples' and/or 'random'");
    return [field = std::move(*sys.field), init, span, dt, samples, n](const RunContext& ctx) {
        const NPath path = classical::evolve_equal_time(field, init, span, dt);
        // validity_residual is sequential per call; split the samples across workers.
        auto reports = parallel_map(samples.size(), ctx.jobs, [&](std::size_t i) {
            return classical::validity_residual(field, path, std::span(samples).subspan(i, 1));
        });
        Outcome out;
        CsvTable csv{"validity", {"sample"}, {}};
        for (std::size_t j = 0; j < n; ++j) csv.columns.push_back("t" + std::to_string(j + 1));
        for (std::size_t j = 0; j < n; ++j) csv.columns.push_back("r" + std::to_string(j + 1));
        csv.columns.push_back("max");
        csv.columns.push_back("status");
        json rows = json::array();
        double worst = 0.0;
        std::size_t accepted = 0;
        std::size_t rejected = 0;
        for (std::size_t i = 0; i < reports.size(); ++i) {
            std::vector<std::string> line{format_number(i)};
            for (double t : samples[i]) line.push_back(format_number(t));
            if (reports[i].accepted.empty()) {
                ++rejected;
                for (std::size_t j = 0; j < n + 1; ++j) line.emplace_back();
                line.emplace_back("rejected");
                rows.push_back({{"times", samples[i]}, {"status", "rejected"}});
            } else {
                ++accepted;
                const auto& s = reports[i].accepted.front();
                for (double r : s.per_particle) line.push_back(format_number(r));
                line.push_back(format_number(s.max));
                line.emplace_back("accepted");
                worst = std::max(worst, s.max);
                rows.push_back({{"times", samples[i]}, {"status", "accepted"}, {"residuals", s.per_particle},
                                {"max", s.max}});
            }
            csv.add(std::move(line));
        }
        out.results = {{"max_residual", worst}, {"accepted", accepted}, {"rejected", rejected},
                       {"samples", rows}, {"warnings", path.warnings}};
        out.csv = std::move(csv);
        return out;
    };
}

Runner full_grid(ClassicalSystem sys, ObjectReader& e) {
    require(e, sys.partials.size() == 2, "full-grid needs 'partials' for exactly two particles");
    ObjectReader r = e.object("initial");
    const PhasePoint init = read_phase_point(r, sys.shape.n, sys.shape.d);
    e.attach("initial", r.finish());
    ObjectReader g = e.object_or_empty("grid");
    classical::GridSpec spec;
    spec.t1_extent = g.optional<double>("t1_extent", spec.t1_extent);
    spec.t2_extent = g.optional<double>("t2_extent", spec.t2_extent);
    spec.cells1 = g.optional<std::size_t>("cells1", spec.cells1);
    spec.cells2 = g.optional<std::size_t>("cells2", spec.cells2);
    if (spec.cells1 == 0 || spec.cells2 == 0) g.fail("", "cells1 and cells2 must be positive");
    e.attach("grid", g.finish());
    const double dt = e.optional<double>("dt", 1e-2);
    if (!(dt > 0.0)) e.fail("dt", "dt must be positive");
    return [sys = std::move(sys), init, spec, dt](const RunContext&) {
        const auto sol = classical::evolve_full_grid(sys.partials[0], sys.partials[1], init, spec, dt);
        const auto& layout = sol.layout();
        json rates = json::array();
        for (std::size_t j = 0; j < 2; ++j) {
            rates.push_back({sol.max_position_rate(j, 0), sol.max_position_rate(j, 1)});
        }
        const auto corner = sol.node(spec.cells1, spec.cells2);
        Outcome out;
        out.results = {{"position_rates", rates},
                       {"position_rates_definition", "row j: max |dx_j/dt_1|, max |dx_j/dt_2| over the grid"},
                       {"corner", classical::unpack(layout, corner).positions},
                       {"corner_momenta", classical::unpack(layout, corner).momenta}};
        CsvTable csv{"grid", {"i1", "i2"}, {}};
        for (const auto& name : layout.names()) csv.columns.push_back(name);
        for (std::size_t i1 = 0; i1 < sol.t1().size(); ++i1) {
            for (std::size_t i2 = 0; i2 < sol.t2().size(); ++i2) {
                std::vector<std::string> line{format_number(i1), format_number(i2)};
                for (double v : sol.node(i1, i2)) line.push_back(format_number(v));
                csv.add(std::move(line));
            }
        }
        out.csv = std::move(csv);
        return out;
    };
}

Runner path_independence(ClassicalSystem sys, ObjectReader& e) {
    require(e, sys.partials.size() == 2, "path-independence needs 'partials' for exactly two particles");
    ObjectReader r = e.object("initial");
    const PhasePoint init = read_phase_point(r, sys.shape.n, sys.shape.d);
    e.attach("initial", r.finish());
    const auto rects = e.optional<std::vector<std::vector<double>>>(
        "rectangles", {{0.2, 0.2}, {0.1, 0.1}, {0.05, 0.05}});
    for (const auto& rect : rects) {
        if (rect.size() != 2) e.fail("rectangles", "rectangles are [a, b]");
    }
    const double dt = e.optional<double>("dt", 1e-3);
    if (!(dt > 0.0)) e.fail("dt", "dt must be positive");
    const double h = e.optional<double>("h", hj::kDefaultSecondOrderStep);
    if (!(h > 0.0)) e.fail("h", "h must be positive");
    std::vector<std::string> partials;
    for (const auto& spec : sys.partial_specs) partials.push_back(spec.combined());
    hj::HamiltonianFunctionSet hs(sys.shape.n, sys.shape.d, partials, std::nullopt, sys.shape.step);
    return [sys = std::move(sys), hs = std::move(hs), init, rects, dt, h](const RunContext& ctx) {
        const double reference = hj::defect_flow_norm(hs, init, 0, 1, h);
        auto gaps = parallel_map(rects.size(), ctx.jobs, [&](std::size_t i) {
            return classical::grid_path_independence(sys.partials[0], sys.partials[1], init, rects[i][0],
                                                     rects[i][1], dt);
        });
        Outcome out;
        CsvTable csv{"path_independence", {"a", "b", "area", "gap", "gap_over_area", "reference", "ratio_to_reference"}, {}};
        json rows = json::array();
        for (std::size_t i = 0; i < rects.size(); ++i) {
            const double area = std::fabs(rects[i][0] * rects[i][1]);
            const json scaled = area > 0.0 ? json(gaps[i] / area) : json(nullptr);
            const json ratio = area > 0.0 && reference > 0.0 ? json(gaps[i] / area / reference) : json(nullptr);
            rows.push_back({{"a", rects[i][0]}, {"b", rects[i][1]}, {"area", area}, {"gap", gaps[i]},
                            {"gap_over_area", scaled}, {"ratio_to_reference", ratio}});
            auto cell = [](const json& v) { return v.is_null() ? std::string() : format_number(v.get<double>()); };
            csv.add({format_number(rects[i][0]), format_number(rects[i][1]), format_number(area),
                     format_number(gaps[i]), cell(scaled), format_number(reference), cell(ratio)});
        }
        out.results = {{"rows", rows}, {"reference", reference},
                       {"reference_definition", "|grad_{x,p} P_12| at the initial point"}};
        out.csv = std::move(csv);
        return out;
    };
}

Runner cjs(ClassicalSystem sys, ObjectReader& e) {
    require(e, !sys.family.empty(), "cjs-demo needs a 'family' system");
    classical::CjsOptions opts;
    opts.rapidities = e.optional<std::vector<double>>("rapidities", opts.rapidities);
    opts.samples = e.optional<std::size_t>("samples", opts.samples);
    opts.seed = e.optional<std::uint64_t>("seed", opts.seed);
    opts.time_range = e.optional<double>("time_range", opts.time_range);
    opts.position_range = e.optional<double>("position_range", opts.position_range);
    opts.momentum_range = e.optional<double>("momentum_range", opts.momentum_range);
    opts.step = e.optional<double>("h", opts.step);
    if (!(opts.step > 0.0)) e.fail("h", "h must be positive");
    ObjectReader w = e.object("world_line");
    opts.world_line_init = read_initial(w, sys.shape);
    opts.span = w.optional<double>("span", opts.span);
    opts.dt = w.optional<double>("dt", opts.dt);
    if (!(opts.span > 0.0) || !(opts.dt > 0.0)) w.fail("", "span and dt must be positive");
    e.attach("world_line", w.finish());
    return [family = std::move(sys.family), opts](const RunContext& ctx) {
        auto rows = parallel_map(family.size(), ctx.jobs, [&](std::size_t i) {
            return classical::cjs_demo(std::span(family).subspan(i, 1), opts).front();
        });
        Outcome out;
        CsvTable csv{"cjs", {"id", "max_defect", "min_defect", "chord_deviation", "points"}, {}};
        json table = json::array();
        for (const auto& r : rows) {
            table.push_back({{"id", r.id}, {"max_defect", r.max_defect}, {"min_defect", r.min_defect},
                             {"chord_deviation", r.chord_deviation}, {"points", r.points}});
            csv.add({r.id, format_number(r.max_defect), format_number(r.min_defect),
                     format_number(r.chord_deviation), format_number(r.points)});
        }
        out.results = {{"members", table}};
        out.csv = std::move(csv);
        return out;
    };
}

}  // namespace

Runner prepare_classical(ObjectReader& system, ObjectReader& experiment, const std::string& kind,
                         json& system_echo, json& experiment_echo) {
    ClassicalSystem sys = read_system(system);
    system_echo = system.finish();
    Runner run;
    if (kind == "defect-grid") run = defect_grid(std::move(sys), experiment);
    else if (kind == "equal-time-evolve") run = equal_time(std::move(sys), experiment);
    else if (kind == "validity") run = validity(std::move(sys), experiment);
    else if (kind == "full-grid") run = full_grid(std::move(sys), experiment);
    else if (kind == "path-independence") run = path_independence(std::move(sys), experiment);
    else if (kind == "cjs-demo") run = cjs(std::move(sys), experiment);
    else experiment.fail("kind", "experiment kind '" + kind + "' is not available for the classical formalism");
    experiment_echo = experiment.finish();
    return run;
}

}  // namespace multitime::cli
