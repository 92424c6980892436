#include "multitime_cli/app.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "multitime/errors.hpp"
#include "multitime/hamilton_jacobi.hpp"
#include "multitime/linops.hpp"
#include "multitime/numdiff.hpp"
#include "multitime_cli/examples.hpp"

#ifndef MULTITIME_VERSION
#define MULTITIME_VERSION "unknown"
#endif

namespace multitime::cli {

json settings_json() {
    return {
        {"finite_difference",
         {{"default_relative_step", kDefaultRelativeStep},
          {"minimum_step", kMinimumStep},
          {"scheme", "central"},
          {"directional_step", classical::kDefaultDirectionalStep},
          {"quantum_time_step", quantum::kDefaultTimeStep},
          {"second_order_step", hj::kDefaultSecondOrderStep}}},
        {"tolerances",
         {{"hermiticity", quantum::kHermiticityTolerance},
          {"smoothness_warning", hj::kSmoothnessWarning},
          {"timelike_warning_speed", 1.0},
          {"spacelike_inequality", "strict"}}},
        {"integrators",
         {{"classical", "rk4"},
          {"quantum", "exponential-midpoint"},
          {"interpolation", "cubic-hermite"},
          {"matrix_exponential", "taylor-scaling-squaring"},
          {"matrix_exponential_max_dim", linalg::kMaxExponentialDim}}},
        {"units", "c = 1, hbar = 1"},
    };
}

json build_report(Subcommand subcommand, const LoadedConfig& config, const Outcome& outcome,
                  const std::string& csv_path) {
    json report{
        {"tool", {{"name", "multitime"}, {"version", MULTITIME_VERSION}}},
        {"subcommand", std::string(subcommand_name(subcommand))},
        {"formalism", config.formalism},
        {"kind", config.kind},
        {"config", config.echo},
        {"settings", settings_json()},
        {"results", outcome.results},
    };
    if (!csv_path.empty() && outcome.csv) {
        report["csv"] = {{"version", kCsvVersion},
                         {"table", outcome.csv->name},
                         {"columns", outcome.csv->columns},
                         {"rows", outcome.csv->rows.size()},
                         {"path", csv_path}};
    }
    return report;
}

std::size_t resolve_jobs(std::size_t flag) {
    if (const char* env = std::getenv("MULTITIME_JOBS"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end != nullptr && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    if (flag > 0) return flag;
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct RunFlags {
    std::string config;
    std::string out;
    std::string csv;
    std::size_t jobs = 0;
};

int fail(std::ostream& err, int code, const std::string& message) {
    err << "multitime: " << message << '\n';
    return code;
}

int run_subcommand(Subcommand sub, const RunFlags& flags, std::ostream& out, std::ostream& err) {
    std::ifstream in(flags.config);
    if (!in) return fail(err, kExitConfig, "cannot read config file '" + flags.config + "'");
    json document;
    try {
        document = json::parse(in);
    } catch (const json::parse_error& e) {
        return fail(err, kExitConfig, "invalid JSON in '" + flags.config + "': " + e.what());
    }

    LoadedConfig config;
    Outcome outcome;
    const auto started = std::chrono::steady_clock::now();
    try {
        config = load_config(document, sub);
        outcome = config.run(RunContext{resolve_jobs(flags.jobs)});
    } catch (const ConfigError& e) {
        return fail(err, kExitConfig, std::string("config error at ") + e.what());
    } catch (const NumericalError& e) {
        return fail(err, kExitNumerical, std::string("numerical failure: ") + e.what());
    } catch (const Error& e) {
        return fail(err, kExitConfig, std::string("invalid configuration: ") + e.what());
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;

    json report = build_report(sub, config, outcome, flags.csv);
    report["duration_seconds"] = elapsed.count();

    if (!flags.csv.empty() && outcome.csv) {
        std::ofstream csv(flags.csv);
        if (!csv) return fail(err, kExitConfig, "cannot write CSV file '" + flags.csv + "'");
        write_csv(csv, *outcome.csv);
    }
    const std::string text = report.dump(2) + "\n";
    if (flags.out.empty() || flags.out == "-") {
        out << text;
    } else {
        std::ofstream file(flags.out);
        if (!file) return fail(err, kExitConfig, "cannot write report file '" + flags.out + "'");
        file << text;
    }
    return kExitOk;
}

int write_examples(const std::string& dir, std::ostream& out, std::ostream& err) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) return fail(err, kExitConfig, "cannot create directory '" + dir + "': " + ec.message());
    for (const auto& ex : shipped_examples()) {
        const auto path = std::filesystem::path(dir) / ex.file_name;
        std::ofstream file(path);
        if (!file) return fail(err, kExitConfig, "cannot write '" + path.string() + "'");
        file << ex.text;
        out << path.string() << '\n';
    }
    return kExitOk;
}

}  // namespace

int run_app(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-time dynamics: consistency defects, holonomies, validity and foliation experiments",
                 "multitime"};
    app.set_version_flag("--version", MULTITIME_VERSION);
    app.require_subcommand(1);

    RunFlags flags;
    struct Entry {
        Subcommand id;
        const char* help;
        CLI::App* app = nullptr;
    };
    std::vector<Entry> entries{
        {Subcommand::check, "Consistency defects on a grid of points"},
        {Subcommand::evolve, "Staircase, diagonal or equal-time evolution"},
        {Subcommand::holonomy, "Rectangle holonomies with area scaling"},
        {Subcommand::validity, "Validity residuals of an equal-time n-path"},
        {Subcommand::grid, "All-times grid system and path independence"},
        {Subcommand::hj, "Hamilton-Jacobi residuals and velocity consistency"},
        {Subcommand::foliation, "Trajectories on flat foliations and their comparison"},
        {Subcommand::cjs, "Interaction family demonstration"},
    };
    for (auto& e : entries) {
        e.app = app.add_subcommand(std::string(subcommand_name(e.id)), e.help);
        e.app->add_option("--config", flags.config, "JSON experiment configuration")->required();
        e.app->add_option("--out", flags.out, "Report path (default: stdout)");
        e.app->add_option("--csv", flags.csv, "Write the tabular output to this CSV file");
        e.app->add_option("--jobs", flags.jobs, "Worker threads (default: hardware threads; MULTITIME_JOBS overrides)");
    }
    std::string dir;
    bool list = false;
    CLI::App* examples = app.add_subcommand("examples", "Write the shipped example configurations");
    examples->add_option("--dir", dir, "Target directory");
    examples->add_flag("--list", list, "Print the example names only");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    if (examples->parsed()) {
        if (dir.empty() || list) {
            for (const auto& ex : shipped_examples()) out << ex.file_name << '\n';
            return kExitOk;
        }
        return write_examples(dir, out, err);
    }
    for (const auto& e : entries) {
        if (e.app->parsed()) return run_subcommand(e.id, flags, out, err);
    }
    return kExitConfig;
}

}  // namespace multitime::cli
