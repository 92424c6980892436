#pragma once

// Finite-difference derivatives. Every consistency quantity in this library is
// evaluated pointwise through these helpers.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "multitime/errors.hpp"

namespace multitime {

inline constexpr double kDefaultRelativeStep = 1e-4;
inline constexpr double kMinimumStep = 1e-6;

/// 1e-4 * max(1, |x|), never below 1e-6.
double default_step(double x);

/// Throws NumericalError when x + h or x - h rounds back to x.
void check_step(double x, double h);

/// (f(x + h) - f(x - h)) / 2h
template <class F>
double central_difference(F&& f, double x, double h) {
    check_step(x, h);
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// (4 D(h/2) - D(h)) / 3 with D the central difference: fourth order.
template <class F>
double richardson_difference(F&& f, double x, double h) {
    const double coarse = central_difference(f, x, h);
    const double fine = central_difference(f, x, 0.5 * h);
    return (4.0 * fine - coarse) / 3.0;
}

/// Central difference of f along coordinate `index` of the point z.
template <class F>
double partial_difference(F&& f, std::span<const double> z, std::size_t index, double h) {
    std::vector<double> work(z.begin(), z.end());
    const double x0 = z[index];
    return central_difference(
        [&](double x) {
            work[index] = x;
            return f(std::span<const double>(work));
        },
        x0, h);
}

/// Central difference of f along the direction `dir` (not normalized):
/// (f(z + h dir) - f(z - h dir)) / 2h, i.e. the directional derivative dir . grad f.
template <class F>
double directional_difference(F&& f, std::span<const double> z, std::span<const double> dir,
                              double h) {
    if (dir.size() != z.size()) throw DimensionError("directional_difference: size mismatch");
    std::vector<double> plus(z.begin(), z.end());
    std::vector<double> minus(z.begin(), z.end());
    bool moved = false;
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (dir[i] == 0.0) continue;
        moved = true;
        plus[i] = z[i] + h * dir[i];
        minus[i] = z[i] - h * dir[i];
    }
    if (!moved) return 0.0;
    if (!(h > 0.0)) throw NumericalError("finite-difference step must be positive");
    return (f(std::span<const double>(plus)) - f(std::span<const double>(minus))) / (2.0 * h);
}

}  // namespace multitime
