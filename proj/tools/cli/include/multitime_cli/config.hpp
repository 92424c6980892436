#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "multitime/classical.hpp"
#include "multitime/hamilton_jacobi.hpp"
#include "multitime/quantum.hpp"
#include "multitime_cli/config_reader.hpp"
#include "multitime_cli/report.hpp"

namespace multitime::cli {

enum class Subcommand { check, evolve, holonomy, validity, grid, hj, foliation, cjs };

std::optional<Subcommand> parse_subcommand(std::string_view name);
std::string_view subcommand_name(Subcommand s);

struct RunContext {
    std::size_t jobs = 1;
};

struct Outcome {
    json results = json::object();
    std::optional<CsvTable> csv;
};

using Runner = std::function<Outcome(const RunContext&)>;

/// Schema-checked configuration: the resolved echo and the deferred computation.
struct LoadedConfig {
    std::string formalism;
    std::string kind;
    json echo;
    Runner run;
};

/// Throws ConfigError (or a multitime::Error raised while compiling expressions).
LoadedConfig load_config(const json& document, Subcommand subcommand);

/// Experiment kinds each subcommand accepts.
const std::vector<std::string>& kinds_for(Subcommand s);

// Builders shared by the formalism front ends ---------------------------------

Runner prepare_quantum(ObjectReader& system, ObjectReader& experiment, const std::string& kind,
                       json& system_echo, json& experiment_echo);
Runner prepare_classical(ObjectReader& system, ObjectReader& experiment, const std::string& kind,
                         json& system_echo, json& experiment_echo);
Runner prepare_hj(ObjectReader& system, ObjectReader& experiment, const std::string& kind,
                  json& system_echo, json& experiment_echo);

/// {"times": [...], "positions": [[...]], "momenta": [[...]]}; momenta optional
/// when `momenta_required` is false (zero-filled).
classical::PhasePoint read_phase_point(ObjectReader& r, std::size_t n, std::size_t d,
                                       bool momenta_required = true);

/// One row per stored world-line sample; columns from npath_csv_columns.
CsvTable npath_table(const classical::NPath& path);

/// Uniform double in [lo, hi) from the top 53 bits of a 64-bit draw.
double uniform_draw(std::uint64_t bits, double lo, double hi);

}  // namespace multitime::cli
