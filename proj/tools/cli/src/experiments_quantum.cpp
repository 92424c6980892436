#include <cmath>

#include "multitime/errors.hpp"
#include "multitime/layout.hpp"
#include "multitime_cli/config.hpp"
#include "multitime_cli/worker_pool.hpp"

namespace multitime::cli {

namespace {

using linalg::complex;
using linalg::ComplexMatrix;
using linalg::StateVector;
using quantum::PartialHamiltonianSet;

complex read_complex(const json& v, const std::string& pointer) {
    if (v.is_number()) return {json_double(v, pointer), 0.0};
    if (v.is_array() && v.size() == 2) {
        return {json_double(v[0], pointer_join(pointer, std::size_t{0})),
                json_double(v[1], pointer_join(pointer, std::size_t{1}))};
    }
    throw ConfigError(pointer, "expected a number or a [re, im] pair");
}

ComplexMatrix read_matrix(const json& v, const std::string& pointer, std::size_t dim) {
    require_array(v, pointer);
    if (v.size() != dim) throw ConfigError(pointer, "expected " + std::to_string(dim) + " rows");
    ComplexMatrix m(dim);
    for (std::size_t r = 0; r < dim; ++r) {
        const std::string rp = pointer_join(pointer, r);
        require_array(v[r], rp);
        if (v[r].size() != dim) throw ConfigError(rp, "expected " + std::to_string(dim) + " columns");
        for (std::size_t c = 0; c < dim; ++c) m(r, c) = read_complex(v[r][c], pointer_join(rp, c));
    }
    return m;
}

struct SystemShape {
    std::size_t n;
    std::size_t k;
    std::size_t dim;
};

struct ParsedTerm {
    expr::Expression coefficient;
    ComplexMatrix op;
};

// A term is {"pauli": "ZI"} or {"matrix": [[...]]} with an optional coefficient in t1..tn.
ParsedTerm read_term(ObjectReader& r, const SystemShape& shape) {
    ParsedTerm t;
    const bool has_pauli = r.has("pauli");
    const bool has_matrix = r.has("matrix");
    if (has_pauli == has_matrix) r.fail("", "a term needs exactly one of 'pauli' or 'matrix'");
    if (has_pauli) {
        const auto letters = r.required<std::string>("pauli");
        if (shape.k != 2) r.fail("pauli", "Pauli strings require local_dim 2");
        if (letters.size() != shape.n) r.fail("pauli", "expected " + std::to_string(shape.n) + " letters");
        try {
            t.op = quantum::pauli_string(letters);
        } catch (const Error& e) {
            r.fail("pauli", e.what());
        }
    } else {
        t.op = read_matrix(r.raw("matrix"), pointer_join(r.pointer(), "matrix"), shape.dim);
    }
    const auto source = r.optional<std::string>("coefficient", "1");
    try {
        t.coefficient = expr::parse_expression(source);
        (void)VariableLayout::times_only(shape.n).compile(t.coefficient);
    } catch (const Error& e) {
        r.fail("coefficient", e.what());
    }
    return t;
}

std::vector<ParsedTerm> read_terms(ObjectReader& parent, const std::string& key, const SystemShape& shape) {
    std::vector<ParsedTerm> out;
    json echo = json::array();
    for (auto& r : parent.objects(key)) {
        out.push_back(read_term(r, shape));
        echo.push_back(r.finish());
    }
    if (out.empty()) parent.fail(key, "expected at least one term");
    parent.attach(key, std::move(echo));
    return out;
}

ComplexMatrix constant_sum(const std::vector<ParsedTerm>& terms, const ObjectReader& r, const std::string& key,
                           std::size_t dim) {
    ComplexMatrix m(dim);
    for (const auto& t : terms) {
        if (!t.coefficient.free_variables().empty()) r.fail(key, "coefficients must be constant here");
        m += complex(expr::evaluate(t.coefficient, {})) * t.op;
    }
    return m;
}

PartialHamiltonianSet read_system(ObjectReader& system) {
    SystemShape shape{};
    shape.n = system.required<std::size_t>("particles");
    shape.k = system.optional<std::size_t>("local_dim", 2);
    if (shape.n == 0) system.fail("particles", "expected at least one particle");
    if (shape.k < 1) system.fail("local_dim", "expected local_dim >= 1");
    shape.dim = 1;
    for (std::size_t j = 0; j < shape.n; ++j) {
        shape.dim *= shape.k;
        if (shape.dim > linalg::kMaxExponentialDim) {
            system.fail("local_dim", "state space dimension exceeds " + std::to_string(linalg::kMaxExponentialDim));
        }
    }

    std::vector<ComplexMatrix> frame;
    if (system.has("frame")) {
        json echo = json::array();
        for (auto& r : system.objects("frame")) {
            const auto terms = read_terms(r, "terms", shape);
            frame.push_back(constant_sum(terms, r, "terms", shape.dim));
            echo.push_back(r.finish());
        }
        if (frame.size() != shape.n) system.fail("frame", "expected one frame generator per time coordinate");
        system.attach("frame", std::move(echo));
    }

    std::vector<quantum::Generator> generators;
    json echo = json::array();
    const auto layout = VariableLayout::times_only(shape.n);
    for (auto& r : system.objects("hamiltonians")) {
        const bool has_terms = r.has("terms");
        const bool has_kernel = r.has("kernel");
        if (has_terms == has_kernel) r.fail("", "a partial Hamiltonian needs exactly one of 'terms' or 'kernel'");
        if (has_kernel) {
            const auto terms = read_terms(r, "kernel", shape);
            generators.emplace_back(quantum::InteractionGenerator{constant_sum(terms, r, "kernel", shape.dim)});
        } else {
            const auto terms = read_terms(r, "terms", shape);
            const bool constant = std::all_of(terms.begin(), terms.end(), [](const ParsedTerm& t) {
                return t.coefficient.free_variables().empty();
            });
            if (constant) {
                generators.emplace_back(quantum::ConstantGenerator{constant_sum(terms, r, "terms", shape.dim)});
            } else {
                quantum::TermGenerator g;
                for (const auto& t : terms) g.terms.push_back({layout.compile(t.coefficient), t.op});
                generators.emplace_back(std::move(g));
            }
        }
        echo.push_back(r.finish());
    }
    system.attach("hamiltonians", std::move(echo));
    if (generators.size() != shape.n) system.fail("hamiltonians", "expected one partial Hamiltonian per particle");
    try {
        return PartialHamiltonianSet(shape.n, shape.k, std::move(generators), std::move(frame));
    } catch (const NumericalError&) {
        throw;
    } catch (const Error& e) {
        system.fail("hamiltonians", e.what());
    }
}

// {"basis": i} (0-based computational basis index) or {"amplitudes": [...]}.
StateVector read_state(ObjectReader& parent, const std::string& key, std::size_t dim) {
    ObjectReader r = parent.object_or_empty(key);
    StateVector s;
    if (r.has("amplitudes")) {
        const json& a = r.raw("amplitudes");
        const std::string p = pointer_join(r.pointer(), "amplitudes");
        require_array(a, p);
        if (a.size() != dim) r.fail("amplitudes", "expected " + std::to_string(dim) + " amplitudes");
        std::vector<complex> values;
        for (std::size_t i = 0; i < dim; ++i) values.push_back(read_complex(a[i], pointer_join(p, i)));
        s = StateVector(std::move(values));
        if (r.optional<bool>("normalize", true)) {
            if (!(s.norm() > 0.0)) r.fail("amplitudes", "state has zero norm");
            s = s.normalized();
        }
    } else {
        const auto index = r.optional<std::size_t>("basis", 0);
        if (index >= dim) r.fail("basis", "basis index out of range");
        s = StateVector::basis(dim, index);
    }
    parent.attach(key, r.finish());
    return s;
}

std::vector<double> read_times(ObjectReader& r, const std::string& key, std::size_t n) {
    auto t = r.optional<std::vector<double>>(key, std::vector<double>(n, 0.0));
    if (t.size() != n) r.fail(key, "expected " + std::to_string(n) + " times");
    return t;
}

std::vector<std::pair<std::size_t, std::size_t>> read_pairs(ObjectReader& r, std::size_t n) {
    std::vector<std::vector<std::size_t>> def;
    for (std::size_t j = 1; j <= n; ++j) {
        for (std::size_t k = j + 1; k <= n; ++k) def.push_back({j, k});
    }
    const auto raw = r.optional<std::vector<std::vector<std::size_t>>>("pairs", def);
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const auto& p : raw) {
        if (p.size() != 2 || p[0] < 1 || p[1] < 1 || p[0] > n || p[1] > n || p[0] == p[1]) {
            r.fail("pairs", "pairs must be [j, k] with 1 <= j != k <= n");
        }
        out.emplace_back(p[0] - 1, p[1] - 1);
    }
    return out;
}

// Time tuples from an explicit list and/or a regular grid.
std::vector<std::vector<double>> read_time_points(ObjectReader& e, std::size_t n) {
    std::vector<std::vector<double>> points;
    if (e.has("points")) {
        points = e.required<std::vector<std::vector<double>>>("points");
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (points[i].size() != n) {
                throw ConfigError(pointer_join(pointer_join(e.pointer(), "points"), i),
                                  "expected " + std::to_string(n) + " times");
            }
        }
    }
    if (e.has("grid")) {
        ObjectReader g = e.object("grid");
        const auto lower = g.required<std::vector<double>>("lower");
        const auto upper = g.required<std::vector<double>>("upper");
        const auto counts = g.required<std::vector<std::size_t>>("counts");
        if (lower.size() != n || upper.size() != n || counts.size() != n) {
            g.fail("", "lower, upper and counts need one entry per time coordinate");
        }
        std::size_t total = 1;
        for (auto c : counts) {
            if (c == 0) g.fail("counts", "counts must be positive");
            total *= c;
        }
        for (std::size_t idx = 0; idx < total; ++idx) {
            std::vector<double> t(n);
            std::size_t rest = idx;
            for (std::size_t a = n; a-- > 0;) {
                const std::size_t i = rest % counts[a];
                rest /= counts[a];
                t[a] = counts[a] == 1 ? lower[a]
                                      : lower[a] + (upper[a] - lower[a]) * static_cast<double>(i) /
                                                       static_cast<double>(counts[a] - 1);
            }
            points.push_back(std::move(t));
        }
        e.attach("grid", g.finish());
    }
    if (points.empty()) e.fail("points", "need 'points' and/or 'grid'");
    return points;
}

json state_json(const StateVector& s) {
    json out = json::array();
    for (std::size_t i = 0; i < s.dim(); ++i) out.push_back({s[i].real(), s[i].imag()});
    return out;
}

CsvTable state_csv(const StateVector& s) {
    CsvTable t{"state", {"index", "re", "im"}, {}};
    for (std::size_t i = 0; i < s.dim(); ++i) {
        t.add({format_number(i), format_number(s[i].real()), format_number(s[i].imag())});
    }
    return t;
}

// ---------------------------------------------------------------------------

Runner defect_grid(PartialHamiltonianSet sys, ObjectReader& e) {
    const auto points = read_time_points(e, sys.particles());
    const double h = e.optional<double>("h", quantum::kDefaultTimeStep);
    if (!(h > 0.0)) e.fail("h", "h must be positive");
    return [sys = std::move(sys), points, h](const RunContext& ctx) {
        const std::size_t n = sys.particles();
        struct Row {
            DefectReport report;
            std::vector<double> commutator;
        };
        auto rows = parallel_map(points.size(), ctx.jobs, [&](std::size_t i) {
            Row row{quantum::quantum_consistency_defect(sys, points[i], h), {}};
            for (const auto& p : row.report.pairs) {
                const auto c = linalg::commutator(sys.partial(p.j, points[i]), sys.partial(p.k, points[i]));
                row.commutator.push_back((complex(0.0, 1.0) * c).norm_inf());
            }
            return row;
        });
        Outcome out;
        CsvTable csv{"defects", {"point"}, {}};
        for (std::size_t a = 0; a < n; ++a) csv.columns.push_back("t" + std::to_string(a + 1));
        for (const char* c : {"j", "k", "defect", "commutator_norm"}) csv.columns.push_back(c);
        json table = json::array();
        double worst = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            json pairs = json::array();
            for (std::size_t q = 0; q < rows[i].report.pairs.size(); ++q) {
                const auto& p = rows[i].report.pairs[q];
                pairs.push_back({{"j", p.j + 1}, {"k", p.k + 1}, {"defect", p.value},
                                 {"commutator_norm", rows[i].commutator[q]}});
                std::vector<std::string> line{format_number(i)};
                for (double t : points[i]) line.push_back(format_number(t));
                line.push_back(format_number(p.j + 1));
                line.push_back(format_number(p.k + 1));
                line.push_back(format_number(p.value));
                line.push_back(format_number(rows[i].commutator[q]));
                csv.add(std::move(line));
            }
            worst = std::max(worst, rows[i].report.max);
            table.push_back({{"times", points[i]}, {"pairs", pairs}, {"max", rows[i].report.max}});
        }
        out.results = {{"points", table}, {"max_defect", worst}, {"h", h}};
        out.csv = std::move(csv);
        return out;
    };
}

Runner staircase(PartialHamiltonianSet sys, ObjectReader& e) {
    const std::size_t n = sys.particles();
    const StateVector phi0 = read_state(e, "initial_state", sys.dim());
    const auto start = read_times(e, "start", n);
    std::vector<quantum::Segment> segments;
    json echo = json::array();
    for (auto& r : e.objects("segments")) {
        quantum::Segment s;
        const auto axis = r.required<std::size_t>("axis");
        if (axis < 1 || axis > n) r.fail("axis", "axis must be in 1.." + std::to_string(n));
        s.axis = axis - 1;
        s.duration = r.required<double>("duration");
        s.substeps = r.optional<std::size_t>("substeps", 1);
        if (s.substeps == 0) r.fail("substeps", "substeps must be positive");
        segments.push_back(s);
        echo.push_back(r.finish());
    }
    e.attach("segments", std::move(echo));
    const auto diagonal_steps = e.optional<std::size_t>("diagonal_steps", 0);
    quantum::StaircasePath path(start, segments);
    if (diagonal_steps > 0) {
        const auto end = path.endpoint();
        auto equal = [](const std::vector<double>& t) {
            return std::all_of(t.begin(), t.end(), [&](double v) { return v == t.front(); });
        };
        if (!equal(start) || !equal(end)) {
            e.fail("diagonal_steps", "diagonal comparison needs a path from an equal-time tuple to an equal-time tuple");
        }
    }
    return [sys = std::move(sys), phi0, path, diagonal_steps](const RunContext&) {
        const auto final_state = quantum::evolve_staircase(sys, {phi0, path.start()}, path);
        Outcome out;
        out.results = {{"final_times", final_state.times},
                       {"final_state", state_json(final_state.state)},
                       {"norm", final_state.state.norm()},
                       {"norm_drift", std::fabs(final_state.state.norm() - phi0.norm())}};
        if (diagonal_steps > 0) {
            const auto diag = quantum::diagonal_evolution(sys, phi0, path.start().front(),
                                                          path.endpoint().front(), diagonal_steps);
            out.results["diagonal_comparison"] = {{"steps", diagonal_steps},
                                                  {"distance", (final_state.state - diag).norm()}};
        }
        out.csv = state_csv(final_state.state);
        return out;
    };
}

Runner diagonal(PartialHamiltonianSet sys, ObjectReader& e) {
    const StateVector psi0 = read_state(e, "initial_state", sys.dim());
    const double t0 = e.optional<double>("t_start", 0.0);
    const double t1 = e.required<double>("t_end");
    const auto steps = e.required<std::size_t>("steps");
    if (steps == 0) e.fail("steps", "steps must be positive");
    return [sys = std::move(sys), psi0, t0, t1, steps](const RunContext&) {
        const auto psi = quantum::diagonal_evolution(sys, psi0, t0, t1, steps);
        Outcome out;
        out.results = {{"final_state", state_json(psi)}, {"norm", psi.norm()},
                       {"norm_drift", std::fabs(psi.norm() - psi0.norm())}};
        out.csv = state_csv(psi);
        return out;
    };
}

Runner holonomy(PartialHamiltonianSet sys, ObjectReader& e) {
    const std::size_t n = sys.particles();
    if (n < 2) e.fail("", "holonomy needs at least two time coordinates");
    const auto at = read_times(e, "at", n);
    const auto pairs = read_pairs(e, n);
    const StateVector phi0 = read_state(e, "initial_state", sys.dim());
    const auto substeps = e.optional<std::size_t>("substeps", 1);
    if (substeps == 0) e.fail("substeps", "substeps must be positive");
    const double h = e.optional<double>("h", quantum::kDefaultTimeStep);
    if (!(h > 0.0)) e.fail("h", "h must be positive");
    std::vector<std::pair<double, double>> rects;
    if (e.has("rectangles")) {
        for (const auto& r : e.required<std::vector<std::vector<double>>>("rectangles")) {
            if (r.size() != 2 || r[0] < 0.0 || r[1] < 0.0) e.fail("rectangles", "rectangles are [epsilon, delta] with non-negative sides");
            rects.emplace_back(r[0], r[1]);
        }
    } else {
        for (double eps : e.optional<std::vector<double>>("epsilons", {0.1, 0.05, 0.01})) {
            if (eps < 0.0) e.fail("epsilons", "epsilons must be non-negative");
            rects.emplace_back(eps, eps);
        }
    }
    return [sys = std::move(sys), at, pairs, phi0, substeps, h, rects](const RunContext& ctx) {
        struct Job {
            std::size_t pair;
            std::size_t rect;
        };
        std::vector<Job> jobs;
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            for (std::size_t r = 0; r < rects.size(); ++r) jobs.push_back({p, r});
        }
        auto references = parallel_map(pairs.size(), ctx.jobs, [&](std::size_t p) {
            const auto c = quantum::consistency_operator(sys, at, pairs[p].first, pairs[p].second, h);
            return (c * phi0).norm();
        });
        auto values = parallel_map(jobs.size(), ctx.jobs, [&](std::size_t i) {
            const auto [j, k] = pairs[jobs[i].pair];
            const auto [eps, delta] = rects[jobs[i].rect];
            return quantum::rectangle_holonomy(sys, at, j, k, eps, delta, phi0, substeps);
        });
        Outcome out;
        CsvTable csv{"holonomy",
                     {"j", "k", "epsilon", "delta", "area", "holonomy", "holonomy_over_area", "reference",
                      "ratio_to_reference"},
                     {}};
        json rows = json::array();
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            const auto [j, k] = pairs[jobs[i].pair];
            const auto [eps, delta] = rects[jobs[i].rect];
            const double area = eps * delta;
            const double ref = references[jobs[i].pair];
            const json scaled = area > 0.0 ? json(values[i] / area) : json(nullptr);
            const json ratio = area > 0.0 && ref > 0.0 ? json(values[i] / area / ref) : json(nullptr);
            rows.push_back({{"j", j + 1}, {"k", k + 1}, {"epsilon", eps}, {"delta", delta}, {"area", area},
                            {"holonomy", values[i]}, {"holonomy_over_area", scaled},
                            {"reference", ref}, {"ratio_to_reference", ratio}});
            auto cell = [](const json& v) { return v.is_null() ? std::string() : format_number(v.get<double>()); };
            csv.add({format_number(j + 1), format_number(k + 1), format_number(eps), format_number(delta),
                     format_number(area), format_number(values[i]), cell(scaled), format_number(ref), cell(ratio)});
        }
        out.results = {{"rows", rows}, {"reference_definition", "||C_jk phi0|| at the rectangle corner"}};
        out.csv = std::move(csv);
        return out;
    };
}

}  // namespace

Runner prepare_quantum(ObjectReader& system, ObjectReader& experiment, const std::string& kind,
                       json& system_echo, json& experiment_echo) {
    PartialHamiltonianSet sys = read_system(system);
    system_echo = system.finish();
    Runner run;
    if (kind == "defect-grid") run = defect_grid(std::move(sys), experiment);
    else if (kind == "staircase") run = staircase(std::move(sys), experiment);
    else if (kind == "equal-time-evolve") run = diagonal(std::move(sys), experiment);
    else if (kind == "holonomy") run = holonomy(std::move(sys), experiment);
    else experiment.fail("kind", "experiment kind '" + kind + "' is not available for the quantum formalism");
    experiment_echo = experiment.finish();
    return run;
}

}  // namespace multitime::cli
