#include "multitime_cli/config.hpp"

#include <algorithm>

namespace multitime::cli {

namespace {

struct SubcommandInfo {
    Subcommand id;
    std::string_view name;
};

constexpr SubcommandInfo kSubcommands[] = {
    {Subcommand::check, "check"},         {Subcommand::evolve, "evolve"},
    {Subcommand::holonomy, "holonomy"},   {Subcommand::validity, "validity"},
    {Subcommand::grid, "grid"},           {Subcommand::hj, "hj"},
    {Subcommand::foliation, "foliation"}, {Subcommand::cjs, "cjs"},
};

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
    return out;
}

}  // namespace

std::optional<Subcommand> parse_subcommand(std::string_view name) {
    for (const auto& s : kSubcommands) {
        if (s.name == name) return s.id;
    }
    return std::nullopt;
}

std::string_view subcommand_name(Subcommand s) {
    for (const auto& info : kSubcommands) {
        if (info.id == s) return info.name;
    }
    return "?";
}

const std::vector<std::string>& kinds_for(Subcommand s) {
    static const std::vector<std::string> check{"defect-grid"};
    static const std::vector<std::string> evolve{"staircase", "equal-time-evolve"};
    static const std::vector<std::string> holonomy{"holonomy"};
    static const std::vector<std::string> validity{"validity"};
    static const std::vector<std::string> grid{"full-grid", "path-independence"};
    static const std::vector<std::string> hj{"hj-residual"};
    static const std::vector<std::string> foliation{"trajectories", "foliation-compare"};
    static const std::vector<std::string> cjs{"cjs-demo"};
    switch (s) {
        case Subcommand::check: return check;
        case Subcommand::evolve: return evolve;
        case Subcommand::holonomy: return holonomy;
        case Subcommand::validity: return validity;
        case Subcommand::grid: return grid;
        case Subcommand::hj: return hj;
        case Subcommand::foliation: return foliation;
        case Subcommand::cjs: return cjs;
    }
    return check;
}

LoadedConfig load_config(const json& document, Subcommand subcommand) {
    ObjectReader top(document, "");
    LoadedConfig out;
    out.formalism = top.required<std::string>("formalism");
    if (out.formalism != "quantum" && out.formalism != "classical" && out.formalism != "hj") {
        top.fail("formalism", "expected one of quantum, classical, hj");
    }
    if (top.has("description")) top.required<std::string>("description");

    ObjectReader system = top.object("system");
    ObjectReader experiment = top.object("experiment");
    out.kind = experiment.required<std::string>("kind");
    const auto& allowed = kinds_for(subcommand);
    if (std::find(allowed.begin(), allowed.end(), out.kind) == allowed.end()) {
        experiment.fail("kind", "subcommand '" + std::string(subcommand_name(subcommand)) +
                                    "' accepts experiment kinds: " + join(allowed));
    }

    json system_echo;
    json experiment_echo;
    if (out.formalism == "quantum") {
        out.run = prepare_quantum(system, experiment, out.kind, system_echo, experiment_echo);
    } else if (out.formalism == "classical") {
        out.run = prepare_classical(system, experiment, out.kind, system_echo, experiment_echo);
    } else {
        out.run = prepare_hj(system, experiment, out.kind, system_echo, experiment_echo);
    }
    top.attach("system", std::move(system_echo));
    top.attach("experiment", std::move(experiment_echo));
    out.echo = top.finish();
    return out;
}

classical::PhasePoint read_phase_point(ObjectReader& r, std::size_t n, std::size_t d, bool momenta_required) {
    classical::PhasePoint p;
    p.times = r.required<std::vector<double>>("times");
    p.positions = r.required<std::vector<std::vector<double>>>("positions");
    if (momenta_required || r.has("momenta")) {
        p.momenta = r.required<std::vector<std::vector<double>>>("momenta");
    } else {
        p.momenta.assign(n, std::vector<double>(d, 0.0));
    }
    if (p.times.size() != n) r.fail("times", "expected " + std::to_string(n) + " times");
    auto check = [&](const std::vector<std::vector<double>>& rows, const char* key) {
        if (rows.size() != n) r.fail(key, "expected " + std::to_string(n) + " particles");
        for (std::size_t j = 0; j < n; ++j) {
            if (rows[j].size() != d) {
                throw ConfigError(pointer_join(pointer_join(r.pointer(), key), j),
                                  "expected " + std::to_string(d) + " components");
            }
        }
    };
    check(p.positions, "positions");
    check(p.momenta, "momenta");
    return p;
}

CsvTable npath_table(const classical::NPath& path) {
    CsvTable t{"npath", classical::npath_csv_columns(path.dim()), {}};
    for (std::size_t j = 0; j < path.particles(); ++j) {
        const auto& line = path.lines[j];
        for (std::size_t i = 0; i < line.size(); ++i) {
            std::vector<std::string> row{format_number(j + 1), format_number(line.times()[i])};
            for (auto span : {line.sample_position(i), line.sample_momentum(i), line.sample_velocity(i),
                              line.sample_force(i)}) {
                for (double v : span) row.push_back(format_number(v));
            }
            t.add(std::move(row));
        }
    }
    return t;
}

double uniform_draw(std::uint64_t bits, double lo, double hi) {
    const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

}  // namespace multitime::cli
