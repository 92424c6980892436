#include <doctest.h>

#include <cmath>

#include "multitime/classical.hpp"
#include "multitime/errors.hpp"
#include "multitime/hamilton_jacobi.hpp"

using namespace multitime;
using namespace multitime::classical;

namespace {

const VariableLayout kLayout(2, 1);

const PhasePoint kInit{{0.0, 0.0}, {{0.5}, {-0.5}}, {{0.3}, {-0.2}}};

}  // namespace

TEST_CASE("free partials decouple on the grid") {
    const HamiltonianFunction h1(kLayout, {"p1_1^2/2"});
    const HamiltonianFunction h2(kLayout, {"p2_1^2/2"});
    const auto grid = evolve_full_grid(h1, h2, kInit, {1.0, 1.0, 50, 50}, 0.02);
    CHECK(grid.t1().size() == 51);
    CHECK(grid.t2().size() == 51);
    CHECK(grid.max_position_rate(0, 1) < 1e-10);
    CHECK(grid.max_position_rate(1, 0) < 1e-10);
    CHECK(grid.max_position_rate(0, 0) == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(grid.position(50, 50, 0, 0) == doctest::Approx(0.5 + 0.3).epsilon(1e-12));
    CHECK(grid.position(50, 50, 1, 0) == doctest::Approx(-0.5 - 0.2).epsilon(1e-12));
    CHECK(grid_path_independence(h1, h2, kInit, 1.0, 1.0, 0.01) < 1e-10);
}

TEST_CASE("coupled partials make x1 depend on t2") {
    const HamiltonianFunction h1(kLayout, {"p1_1^2/2", "(x1_1-x2_1)^2/2"});
    const HamiltonianFunction h2(kLayout, {"p2_1^2/2", "(x1_1-x2_1)^2/2"});
    const auto grid = evolve_full_grid(h1, h2, kInit, {1.0, 1.0, 20, 20}, 0.02);
    CHECK(grid.max_position_rate(0, 1) > 1e-2);
}

TEST_CASE("corner gap scales with area and matches the bracket gradient") {
    const HamiltonianFunction h1(kLayout, {"p1_1^2/2", "(x1_1-x2_1)^2/2"});
    const HamiltonianFunction h2(kLayout, {"p2_1^2/2", "(x1_1-x2_1)^2/2"});
    const hj::HamiltonianFunctionSet set(2, 1, {"p1_1^2/2 + (x1_1-x2_1)^2/2", "p2_1^2/2 + (x1_1-x2_1)^2/2"});
    const double reference = hj::defect_flow_norm(set, kInit, 0, 1);
    CHECK(reference > 0.1);
    double previous = 0.0;
    for (double a : {0.1, 0.05, 0.025}) {
        const double ratio = grid_path_independence(h1, h2, kInit, a, a, 1e-3) / (a * a);
        CHECK(ratio == doctest::Approx(reference).epsilon(0.1));
        if (previous > 0.0) CHECK(ratio == doctest::Approx(previous).epsilon(0.2));
        previous = ratio;
    }
}

TEST_CASE("grid argument checks") {
    const HamiltonianFunction h1(kLayout, {"p1_1^2/2"});
    const HamiltonianFunction h2(kLayout, {"p2_1^2/2"});
    CHECK_THROWS_AS(evolve_full_grid(h1, h2, kInit, {1.0, 1.0, 0, 5}, 0.1), DimensionError);
    CHECK_THROWS_AS(evolve_full_grid(h1, h2, kInit, {1.0, 1.0, 5, 5}, 0.0), DimensionError);
    const VariableLayout three(3, 1);
    const HamiltonianFunction g(three, {"p1_1^2/2"});
    CHECK_THROWS_AS(evolve_full_grid(g, g, kInit, {1.0, 1.0, 5, 5}, 0.1), DimensionError);
    const auto grid = evolve_full_grid(h1, h2, kInit, {1.0, 1.0, 2, 2}, 0.1);
    CHECK_THROWS_AS(grid.max_position_rate(0, 2), DimensionError);
}
