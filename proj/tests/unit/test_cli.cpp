#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "multitime_cli/app.hpp"
#include "multitime_cli/config.hpp"
#include "multitime_cli/config_reader.hpp"
#include "multitime_cli/examples.hpp"
#include "multitime_cli/report.hpp"
#include "multitime_cli/worker_pool.hpp"

using namespace multitime::cli;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "multitime");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_app(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = fs::temp_directory_path() / ("multitime_cli_test_" + std::to_string(::getpid()) + "_" +
                                             std::to_string(counter++));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    std::string write(const std::string& name, const std::string& text) const {
        const auto p = path_ / name;
        std::ofstream(p) << text;
        return p.string();
    }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    fs::path path_;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string subcommand_for(const json& config) {
    const std::string kind = config.at("experiment").at("kind");
    for (auto s : {Subcommand::check, Subcommand::evolve, Subcommand::holonomy, Subcommand::validity,
                   Subcommand::grid, Subcommand::hj, Subcommand::foliation, Subcommand::cjs}) {
        const auto& kinds = kinds_for(s);
        if (std::find(kinds.begin(), kinds.end(), kind) != kinds.end()) return std::string(subcommand_name(s));
    }
    throw std::runtime_error("no subcommand for kind " + kind);
}

json without_duration(json report) {
    report.erase("duration_seconds");
    return report;
}

const char* kHolonomyConfig = R"({
  "formalism": "quantum",
  "system": {"particles": 2, "hamiltonians": [
    {"terms": [{"pauli": "ZI"}, {"pauli": "ZZ", "coefficient": "0.25"}]},
    {"terms": [{"pauli": "IX"}, {"pauli": "ZZ", "coefficient": "0.25"}]}]},
  "experiment": {"kind": "holonomy", "epsilons": [0.04, 0.02]}
})";

}  // namespace

TEST_CASE("every shipped example runs with the expected exit code") {
    TempDir dir;
    REQUIRE(shipped_examples().size() >= 20);
    for (const auto& ex : shipped_examples()) {
        CAPTURE(ex.file_name);
        const auto config = json::parse(ex.text);
        const auto path = dir.write(ex.file_name, ex.text);
        if (ex.file_name == "missing_field.json") {
            const auto r = run({"check", "--config", path});
            CHECK(r.code == kExitConfig);
            CHECK(r.err.find("/system/particles") != std::string::npos);
            continue;
        }
        const auto r = run({subcommand_for(config), "--config", path, "--jobs", "2"});
        REQUIRE(r.code == kExitOk);
        const auto report = json::parse(r.out);
        CHECK(report.at("tool").at("name") == "multitime");
        CHECK(report.at("kind") == config.at("experiment").at("kind"));
        CHECK(report.at("settings").at("finite_difference").at("minimum_step") == 1e-6);
        CHECK(report.contains("results"));
        CHECK(report.at("duration_seconds").get<double>() >= 0.0);
    }
}

TEST_CASE("reports are deterministic across runs and worker counts") {
    TempDir dir;
    for (const char* name : {"validity_harmonic.json", "cjs_family.json", "foliation_coupled.json",
                             "free_classical.json", "hj_coupled.json"}) {
        CAPTURE(name);
        const auto it = std::find_if(shipped_examples().begin(), shipped_examples().end(),
                                     [&](const auto& e) { return e.file_name == name; });
        REQUIRE(it != shipped_examples().end());
        const auto path = dir.write(name, it->text);
        const auto sub = subcommand_for(json::parse(it->text));
        const auto a = run({sub, "--config", path, "--jobs", "1"});
        const auto b = run({sub, "--config", path, "--jobs", "4"});
        const auto c = run({sub, "--config", path, "--jobs", "4"});
        REQUIRE(a.code == 0);
        CHECK(without_duration(json::parse(a.out)).dump(2) == without_duration(json::parse(b.out)).dump(2));
        CHECK(without_duration(json::parse(b.out)).dump(2) == without_duration(json::parse(c.out)).dump(2));
    }
}

TEST_CASE("defaults are echoed in the report") {
    TempDir dir;
    const auto r = run({"holonomy", "--config", dir.write("h.json", kHolonomyConfig)});
    REQUIRE(r.code == 0);
    const auto report = json::parse(r.out);
    const auto& exp = report.at("config").at("experiment");
    CHECK(exp.at("h") == 1e-4);
    CHECK(exp.at("substeps") == 1);
    CHECK(exp.at("pairs") == json::array({json::array({1, 2})}));
    CHECK(report.at("config").at("system").at("local_dim") == 2);
    CHECK(report.at("results").at("rows").size() == 2);
}

TEST_CASE("schema violations report JSON pointers") {
    TempDir dir;
    auto config = json::parse(kHolonomyConfig);

    auto unknown = config;
    unknown["experiment"]["epsilon"] = 0.1;
    auto r = run({"holonomy", "--config", dir.write("a.json", unknown.dump())});
    CHECK(r.code == kExitConfig);
    CHECK(r.err.find("/experiment/epsilon: unknown key 'epsilon'") != std::string::npos);

    auto wrong_type = config;
    wrong_type["experiment"]["epsilons"][1] = "small";
    r = run({"holonomy", "--config", dir.write("b.json", wrong_type.dump())});
    CHECK(r.code == kExitConfig);
    CHECK(r.err.find("/experiment/epsilons/1") != std::string::npos);

    auto top = config;
    top["extra"] = true;
    r = run({"holonomy", "--config", dir.write("c.json", top.dump())});
    CHECK(r.code == kExitConfig);
    CHECK(r.err.find("/extra") != std::string::npos);

    auto term = config;
    term["system"]["hamiltonians"][0]["terms"][1]["coeff"] = "1";
    r = run({"holonomy", "--config", dir.write("d.json", term.dump())});
    CHECK(r.code == kExitConfig);
    CHECK(r.err.find("/system/hamiltonians/0/terms/1/coeff") != std::string::npos);

    r = run({"check", "--config", dir.write("e.json", config.dump())});
    CHECK(r.code == kExitConfig);
    CHECK(r.err.find("accepts experiment kinds: defect-grid") != std::string::npos);

    auto formalism = config;
    formalism["formalism"] = "relativistic";
    r = run({"holonomy", "--config", dir.write("f.json", formalism.dump())});
    CHECK(r.code == kExitConfig);
    CHECK(r.err.find("/formalism") != std::string::npos);
}

TEST_CASE("input and expression errors exit with code 2") {
    TempDir dir;
    CHECK(run({"check", "--config", dir.file("absent.json")}).code == kExitConfig);
    CHECK(run({"check", "--config", dir.write("bad.json", "{ not json")}).code == kExitConfig);

    auto config = json::parse(kHolonomyConfig);
    config["system"]["hamiltonians"][0]["terms"][1]["coefficient"] = "0.25 *";
    const auto r = run({"holonomy", "--config", dir.write("p.json", config.dump())});
    CHECK(r.code == kExitConfig);
    CHECK(r.err.find("column") != std::string::npos);

    CHECK(run({"nonsense"}).code == kExitConfig);
    CHECK(run({"check"}).code == kExitConfig);
    CHECK(run({}).code == kExitConfig);
}

TEST_CASE("numerical failures exit with code 3") {
    TempDir dir;
    const json config = {
        {"formalism", "hj"},
        {"system", {{"particles", 2}, {"dim", 1}, {"S", "2*x1_1 + 2*x2_1"}}},
        {"experiment", {{"kind", "trajectories"}, {"foliation", {{"id", "f"}, {"u", {0.5}}}},
                        {"initial", {{0.0}, {0.0}}}, {"span", 1.0}, {"ds", 0.1}}},
    };
    const auto r = run({"foliation", "--config", dir.write("n.json", config.dump())});
    CHECK(r.code == kExitNumerical);
    CHECK(r.err.find("leaf-crossing") != std::string::npos);

    const auto domain = json::parse(R"j({
      "formalism": "classical",
      "system": {"particles": 1, "dim": 1, "field": {"velocity": [["log(x1_1)"]], "force": [["0"]]}},
      "experiment": {"kind": "defect-grid",
                     "points": [{"times": [0], "positions": [[-1]], "momenta": [[0]]}]}
    })j");
    CHECK(run({"check", "--config", dir.write("d.json", domain.dump())}).code == kExitNumerical);
}

TEST_CASE("report and CSV files") {
    TempDir dir;
    const auto cfg = dir.write("h.json", kHolonomyConfig);
    const auto r = run({"holonomy", "--config", cfg, "--out", dir.file("r.json"), "--csv", dir.file("r.csv")});
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    const auto report = json::parse(read_file(dir.file("r.json")));
    CHECK(report.at("csv").at("version") == kCsvVersion);
    CHECK(report.at("csv").at("rows") == 2);
    const auto csv = read_file(dir.file("r.csv"));
    const auto header = csv.substr(0, csv.find('\n'));
    CHECK(header.find("epsilon") != std::string::npos);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

    const auto plain = run({"holonomy", "--config", cfg});
    CHECK_FALSE(json::parse(plain.out).contains("csv"));
    CHECK(run({"holonomy", "--config", cfg, "--out", dir.file("missing/dir/r.json")}).code == kExitConfig);
}

TEST_CASE("examples subcommand") {
    TempDir dir;
    auto r = run({"examples", "--list"});
    CHECK(r.code == 0);
    CHECK(r.out.find("coupled_qubits.json\n") != std::string::npos);
    r = run({"examples", "--dir", dir.file("out")});
    REQUIRE(r.code == 0);
    for (const auto& ex : shipped_examples()) CHECK(read_file(dir.file("out/" + ex.file_name)) == ex.text);
}

TEST_CASE("help and version") {
    auto r = run({"--version"});
    CHECK(r.code == 0);
    CHECK_FALSE(r.out.empty());
    r = run({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("holonomy") != std::string::npos);
}

TEST_CASE("worker count resolution") {
    ::unsetenv("MULTITIME_JOBS");
    CHECK(resolve_jobs(3) == 3);
    CHECK(resolve_jobs(0) >= 1);
    ::setenv("MULTITIME_JOBS", "5", 1);
    CHECK(resolve_jobs(3) == 5);
    ::setenv("MULTITIME_JOBS", "junk", 1);
    CHECK(resolve_jobs(3) == 3);
    ::unsetenv("MULTITIME_JOBS");
}

TEST_CASE("parallel_map keeps order and reports the lowest failing index") {
    const auto squares = parallel_map(100, 8, [](std::size_t i) { return i * i; });
    for (std::size_t i = 0; i < 100; ++i) CHECK(squares[i] == i * i);
    CHECK(parallel_map(0, 4, [](std::size_t i) { return i; }).empty());
    try {
        parallel_map(50, 8, [](std::size_t i) -> int {
            if (i % 10 == 7) throw std::runtime_error(std::to_string(i));
            return 0;
        });
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()) == "7");
    }
}

TEST_CASE("config reader primitives") {
    CHECK(pointer_join("/a", "b/c~d") == "/a/b~1c~0d");
    CHECK(pointer_join("/a", std::size_t{3}) == "/a/3");
    const json doc = {{"x", 1.5}, {"n", 3}, {"neg", -1}, {"s", "v"}, {"inf", "1e999"}};
    ObjectReader r(doc, "/root");
    CHECK(r.required<double>("x") == 1.5);
    CHECK(r.required<std::size_t>("n") == 3);
    CHECK_THROWS_AS(r.required<std::size_t>("neg"), ConfigError);
    CHECK_THROWS_AS(r.required<double>("s"), ConfigError);
    CHECK(r.optional<double>("missing", 2.0) == 2.0);
    try {
        r.required<double>("absent");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.pointer() == "/root/absent");
    }
    CHECK_THROWS_AS(r.finish(), ConfigError);
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(format_number(std::size_t{42}) == "42");
}
