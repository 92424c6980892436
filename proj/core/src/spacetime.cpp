#include "multitime/spacetime.hpp"

#include <cmath>

#include "multitime/errors.hpp"

namespace multitime::classical {

double interval(const SpacetimePoint& a, const SpacetimePoint& b) {
    if (a.x.size() != b.x.size()) throw DimensionError("interval: spatial dimension mismatch");
    double space = 0.0;
    for (std::size_t i = 0; i < a.x.size(); ++i) {
        const double dx = a.x[i] - b.x[i];
        space += dx * dx;
    }
    const double dt = a.t - b.t;
    return space - dt * dt;
}

bool is_spacelike(const SpacetimePoint& a, const SpacetimePoint& b) {
    if (a.x.size() != b.x.size()) throw DimensionError("is_spacelike: spatial dimension mismatch");
    double space = 0.0;
    for (std::size_t i = 0; i < a.x.size(); ++i) {
        const double dx = a.x[i] - b.x[i];
        space += dx * dx;
    }
    const double dt = a.t - b.t;
    return dt * dt < space;
}

bool is_spacelike(std::span<const SpacetimePoint> config) {
    for (std::size_t j = 0; j < config.size(); ++j) {
        for (std::size_t k = j + 1; k < config.size(); ++k) {
            if (!is_spacelike(config[j], config[k])) return false;
        }
    }
    return true;
}

SpacetimePoint boost(const SpacetimePoint& p, double eta, std::size_t axis) {
    if (axis >= p.x.size()) throw DimensionError("boost: axis out of range");
    const double ch = std::cosh(eta);
    const double sh = std::sinh(eta);
    SpacetimePoint out = p;
    out.t = p.t * ch - p.x[axis] * sh;
    out.x[axis] = -p.t * sh + p.x[axis] * ch;
    return out;
}

std::vector<double> boost_momentum(std::span<const double> p, double mass, double eta,
                                   std::size_t axis) {
    if (axis >= p.size()) throw DimensionError("boost_momentum: axis out of range");
    double p2 = 0.0;
    for (double c : p) p2 += c * c;
    const double energy = std::sqrt(mass * mass + p2);
    std::vector<double> out(p.begin(), p.end());
    out[axis] = -energy * std::sinh(eta) + p[axis] * std::cosh(eta);
    return out;
}

}  // namespace multitime::classical
