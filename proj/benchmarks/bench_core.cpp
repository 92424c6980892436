#include <benchmark/benchmark.h>

#include <vector>

#include "multitime/classical.hpp"
#include "multitime/expr.hpp"
#include "multitime/hamilton_jacobi.hpp"
#include "multitime/quantum.hpp"

using namespace multitime;

namespace {

const char* kSource = "0.5*x^2 + sin(y)*exp(-0.1*x) + tanh(x*y)";

void BM_EvaluateTree(benchmark::State& state) {
    const auto e = expr::parse_expression(kSource);
    const expr::VariableBindings b{{"x", 0.3}, {"y", -1.2}};
    for (auto _ : state) benchmark::DoNotOptimize(expr::evaluate(e, b));
}
BENCHMARK(BM_EvaluateTree);

void BM_EvaluateCompiled(benchmark::State& state) {
    const std::vector<std::string> slots{"x", "y"};
    const expr::CompiledExpression c(expr::parse_expression(kSource), slots);
    const std::vector<double> v{0.3, -1.2};
    for (auto _ : state) benchmark::DoNotOptimize(c(v));
}
BENCHMARK(BM_EvaluateCompiled);

void BM_Propagator(benchmark::State& state) {
    const auto qubits = static_cast<std::size_t>(state.range(0));
    std::string zs(qubits, 'Z'), xs(qubits, 'X');
    const auto h = quantum::pauli_string(zs) + quantum::pauli_string(xs);
    for (auto _ : state) benchmark::DoNotOptimize(linalg::propagator(h, 0.7));
}
BENCHMARK(BM_Propagator)->Arg(2)->Arg(4)->Arg(6);

quantum::PartialHamiltonianSet interaction_pair() {
    return quantum::PartialHamiltonianSet::interaction_picture(
        2, {quantum::pauli_string("ZI"), linalg::ComplexMatrix::zeros(4)},
        {quantum::pauli_string("ZI"), quantum::pauli_string("IX") + linalg::complex(0.5) * quantum::pauli_string("XX")});
}

void BM_QuantumDefect(benchmark::State& state) {
    const auto sys = interaction_pair();
    for (auto _ : state) benchmark::DoNotOptimize(quantum::quantum_consistency_defect(sys, {0.3, 0.2}));
}
BENCHMARK(BM_QuantumDefect);

void BM_Staircase(benchmark::State& state) {
    const auto sys = interaction_pair();
    const auto m = static_cast<std::size_t>(state.range(0));
    const quantum::StaircasePath path({0.0, 0.0}, {{0, 1.0, m}, {1, 1.0, m}});
    const quantum::MultiTimeState init{linalg::StateVector::basis(4, 0), {0.0, 0.0}};
    for (auto _ : state) benchmark::DoNotOptimize(quantum::evolve_staircase(sys, init, path));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * m));
}
BENCHMARK(BM_Staircase)->Arg(100)->Arg(1000);

classical::PhaseVectorField harmonic_field() {
    return classical::PhaseVectorField::from_expressions(2, 1, {1.0, 1.0}, {{"p1_1"}, {"p2_1"}},
                                                         {{"-(x1_1-x2_1)"}, {"x1_1-x2_1"}});
}

void BM_ClassicalDefect(benchmark::State& state) {
    const auto field = harmonic_field();
    const classical::PhasePoint p{{0.1, 0.2}, {{0.5}, {-0.5}}, {{0.3}, {-0.2}}};
    for (auto _ : state) benchmark::DoNotOptimize(classical::classical_consistency_defect(field, p));
}
BENCHMARK(BM_ClassicalDefect);

void BM_EvolveEqualTime(benchmark::State& state) {
    const auto field = harmonic_field();
    const auto init = classical::PhasePoint::equal_time(0.0, {{0.5}, {-0.5}}, {{0.3}, {-0.2}});
    for (auto _ : state) benchmark::DoNotOptimize(classical::evolve_equal_time(field, init, 10.0, 1e-2));
    state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_EvolveEqualTime);

void BM_GridPathIndependence(benchmark::State& state) {
    const VariableLayout layout(2, 1);
    const classical::HamiltonianFunction h1(layout, {"p1_1^2/2", "(x1_1-x2_1)^2/2"});
    const classical::HamiltonianFunction h2(layout, {"p2_1^2/2", "(x1_1-x2_1)^2/2"});
    const classical::PhasePoint p{{0.0, 0.0}, {{0.5}, {-0.5}}, {{0.3}, {-0.2}}};
    for (auto _ : state) benchmark::DoNotOptimize(classical::grid_path_independence(h1, h2, p, 0.1, 0.1, 1e-3));
}
BENCHMARK(BM_GridPathIndependence);

void BM_HjVelocityDefect(benchmark::State& state) {
    const hj::HJFunction s(2, 1, {1.0, 1.0}, "0.5*x1_1 - 0.125*t1 + 0.3*x2_1 - 0.045*t2 + 0.05*(x1_1-x2_1)^2*t1*t2");
    const hj::ConfigurationPoint p{{0.5, 0.7}, {{0.3}, {-0.2}}};
    for (auto _ : state) benchmark::DoNotOptimize(hj::hj_velocity_consistency_defect(s, p));
}
BENCHMARK(BM_HjVelocityDefect);

void BM_FoliationTrajectories(benchmark::State& state) {
    const hj::HJFunction s(2, 1, {1.0, 1.0}, "0.5*x1_1 - 0.125*t1 + 0.3*x2_1 - 0.045*t2 + 0.05*(x1_1-x2_1)^2*t1*t2");
    const hj::Foliation fol{{0.3}, "u=0.3"};
    for (auto _ : state) benchmark::DoNotOptimize(hj::hj_trajectories_foliation(s, fol, {{0.0}, {0.0}}, 0.0, 2.0, 0.01));
}
BENCHMARK(BM_FoliationTrajectories);

}  // namespace

BENCHMARK_MAIN();
