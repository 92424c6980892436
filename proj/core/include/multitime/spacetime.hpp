#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace multitime::classical {

/// (t, x) with c = 1.
struct SpacetimePoint {
    double t = 0.0;
    std::vector<double> x;
};

/// (t_j - t_k)^2 < |x_j - x_k|^2 for every pair j != k. Strict: lightlike
/// separation is not spacelike.
bool is_spacelike(std::span<const SpacetimePoint> config);
bool is_spacelike(const SpacetimePoint& a, const SpacetimePoint& b);

/// Minkowski interval |dx|^2 - dt^2 (positive for spacelike separation).
double interval(const SpacetimePoint& a, const SpacetimePoint& b);

/// Lorentz boost with rapidity `eta` along spatial axis `axis`.
SpacetimePoint boost(const SpacetimePoint& p, double eta, std::size_t axis = 0);

/// Boost of an on-shell momentum (E = sqrt(m^2 + p^2)); returns the new spatial part.
std::vector<double> boost_momentum(std::span<const double> p, double mass, double eta,
                                   std::size_t axis = 0);

}  // namespace multitime::classical
