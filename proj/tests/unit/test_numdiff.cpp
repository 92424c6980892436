#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "multitime/errors.hpp"
#include "multitime/expr.hpp"
#include "multitime/numdiff.hpp"

using namespace multitime;

TEST_CASE("default step") {
    CHECK(default_step(0.0) == doctest::Approx(1e-4));
    CHECK(default_step(0.5) == doctest::Approx(1e-4));
    CHECK(default_step(-20.0) == doctest::Approx(2e-3));
    CHECK(default_step(1e-30) >= kMinimumStep);
}

TEST_CASE("degenerate steps are rejected") {
    auto f = [](double x) { return x * x; };
    CHECK_THROWS_AS(central_difference(f, 1e20, 1e-4), NumericalError);
    CHECK_THROWS_AS(central_difference(f, 1.0, 0.0), NumericalError);
}

TEST_CASE("central differences are exact for quadratics") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 100; ++i) {
        const double a = u(rng), b = u(rng), c = u(rng), x = u(rng);
        auto f = [&](double s) { return a * s * s + b * s + c; };
        const double exact = 2 * a * x + b;
        const double approx = central_difference(f, x, default_step(x));
        CHECK(std::abs(approx - exact) <= 1e-9 * std::max(1.0, std::abs(exact)));
    }
}

TEST_CASE("expression partial derivatives") {
    const auto e = expr::parse_expression("x^2*y + 3*y");
    const expr::VariableBindings b{{"x", 1.5}, {"y", -2.0}};
    CHECK(expr::partial_derivative(e, "x", b) == doctest::Approx(2 * 1.5 * -2.0).epsilon(1e-9));
    CHECK(expr::partial_derivative(e, "y", b) == doctest::Approx(1.5 * 1.5 + 3).epsilon(1e-9));
    const auto s = expr::parse_expression("sin(x)");
    const double rich = expr::partial_derivative(s, "x", {{"x", 0.7}}, 1e-2, expr::DiffScheme::richardson);
    CHECK(std::abs(rich - std::cos(0.7)) < 1e-9);
    CHECK_THROWS_AS(expr::partial_derivative(s, "z", {{"x", 0.7}}), UnboundVariableError);
}

TEST_CASE("central differences converge at second order") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> c(0.5, 2.0);
    std::uniform_real_distribution<double> p(-1.0, 1.0);
    const char* shapes[] = {"sin(a*x)", "exp(a*x)", "tanh(a*x + 0.3)", "cos(a*x)*x", "x^3*a + sin(x)"};
    int checked = 0;
    for (int i = 0; i < 100; ++i) {
        const double a = c(rng);
        const double x = p(rng);
        auto src = std::string(shapes[i % 5]);
        const auto e = expr::parse_expression(src);
        auto f = [&](double s) { return expr::evaluate(e, {{"a", a}, {"x", s}}); };
        const double h = 0.05;
        const double reference = richardson_difference(f, x, h / 16);
        const double err1 = std::abs(central_difference(f, x, h) - reference);
        const double err2 = std::abs(central_difference(f, x, h / 4) - reference);
        if (err1 < 1e-9) continue;
        ++checked;
        CHECK(err1 / err2 >= 10.0);
    }
    CHECK(checked > 50);
}

TEST_CASE("partial and directional differences") {
    auto f = [](std::span<const double> z) { return z[0] * z[0] + 3 * z[0] * z[1]; };
    const std::vector<double> z{1.0, 2.0};
    CHECK(partial_difference(f, z, 0, 1e-4) == doctest::Approx(2 + 6).epsilon(1e-9));
    CHECK(partial_difference(f, z, 1, 1e-4) == doctest::Approx(3).epsilon(1e-9));
    const std::vector<double> dir{1.0, -1.0};
    CHECK(directional_difference(f, z, dir, 1e-4) == doctest::Approx(8 - 3).epsilon(1e-9));
    const std::vector<double> zero{0.0, 0.0};
    CHECK(directional_difference(f, z, zero, 1e-4) == 0.0);
    const std::vector<double> bad{1.0};
    CHECK_THROWS_AS(directional_difference(f, z, bad, 1e-4), DimensionError);
}
