#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "multitime/classical.hpp"
#include "multitime/errors.hpp"

namespace multitime::classical {

namespace {

// Uniform in [lo, hi] from the raw 64-bit stream; independent of the standard
// library's distribution implementation, so reports are reproducible everywhere.
double uniform(std::mt19937_64& rng, double lo, double hi) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

}  // namespace

std::vector<PhasePoint> cjs_sample_points(std::size_t particles, std::size_t dim,
                                          std::span<const double> masses, const CjsOptions& opts) {
    if (masses.size() != particles) throw DimensionError("cjs_sample_points: one mass per particle");
    std::mt19937_64 rng(opts.seed);
    std::vector<PhasePoint> out;
    out.reserve(opts.samples * opts.rapidities.size());
    for (std::size_t s = 0; s < opts.samples; ++s) {
        PhasePoint base;
        bool found = false;
        for (int attempt = 0; attempt < 1000 && !found; ++attempt) {
            base.times.assign(particles, 0.0);
            base.positions.assign(particles, std::vector<double>(dim));
            base.momenta.assign(particles, std::vector<double>(dim));
            std::vector<SpacetimePoint> config(particles);
            for (std::size_t j = 0; j < particles; ++j) {
                base.times[j] = uniform(rng, -opts.time_range, opts.time_range);
                for (std::size_t k = 0; k < dim; ++k) {
                    base.positions[j][k] = uniform(rng, -opts.position_range, opts.position_range);
                    base.momenta[j][k] = uniform(rng, -opts.momentum_range, opts.momentum_range);
                }
                config[j] = {base.times[j], base.positions[j]};
            }
            found = is_spacelike(config);
        }
        if (!found) throw NumericalError("cjs_sample_points: could not draw a spacelike configuration");
        for (double eta : opts.rapidities) {
            PhasePoint boosted = base;
            for (std::size_t j = 0; j < particles; ++j) {
                const SpacetimePoint b = boost({base.times[j], base.positions[j]}, eta);
                boosted.times[j] = b.t;
                boosted.positions[j] = b.x;
                boosted.momenta[j] = boost_momentum(base.momenta[j], masses[j], eta);
            }
            out.push_back(std::move(boosted));
        }
    }
    return out;
}

std::vector<CjsRow> cjs_demo(std::span<const CjsMember> family, const CjsOptions& opts) {
    std::vector<CjsRow> rows;
    rows.reserve(family.size());
    for (const CjsMember& member : family) {
        const PhaseVectorField& field = member.field;
        const auto points = cjs_sample_points(field.particles(), field.dim(), field.masses(), opts);
        CjsRow row;
        row.id = member.id;
        row.min_defect = std::numeric_limits<double>::infinity();
        for (const auto& p : points) {
            const double d = classical_consistency_defect(field, p, opts.step).max;
            row.max_defect = std::max(row.max_defect, d);
            row.min_defect = std::min(row.min_defect, d);
        }
        if (points.empty()) row.min_defect = 0.0;
        row.points = points.size();
        const NPath path = evolve_equal_time(field, opts.world_line_init, opts.span, opts.dt);
        row.chord_deviation = chord_deviation(path);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace multitime::classical
