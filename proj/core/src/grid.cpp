#include <algorithm>
#include <cmath>

#include "multitime/classical.hpp"
#include "multitime/errors.hpp"

namespace multitime::classical {

namespace {

void require_two_times(const HamiltonianFunction& h1, const HamiltonianFunction& h2) {
    if (h1.layout().particles() != 2 || h2.layout().particles() != 2) {
        throw DimensionError("the all-times grid system is implemented for n = 2 only");
    }
    if (h1.layout().dim() != h2.layout().dim()) {
        throw DimensionError("H1 and H2 must share the spatial dimension");
    }
}

std::size_t substeps_for(double duration, double dt) {
    const double ratio = std::fabs(duration) / dt;
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(ratio - 1e-9)));
}

// Hamiltonian flow of H along time axis `axis`, RK4 with `steps` equal steps.
void integrate_leg(const HamiltonianFunction& h, std::vector<double>& z, std::size_t axis,
                   double duration, std::size_t steps) {
    if (duration == 0.0) return;
    const VariableLayout& layout = h.layout();
    const std::size_t n = layout.particles();
    const std::size_t d = layout.dim();
    const double step = duration / static_cast<double>(steps);
    const double origin = z[layout.time(axis)];

    auto rhs = [&](std::span<const double> s, std::vector<double>& out) {
        std::fill(out.begin(), out.end(), 0.0);
        out[layout.time(axis)] = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k = 0; k < d; ++k) {
                out[layout.position(j, k)] = h.derivative(layout.momentum(j, k), s);
                out[layout.momentum(j, k)] = -h.derivative(layout.position(j, k), s);
            }
        }
    };

    std::vector<double> k1(z.size()), k2(z.size()), k3(z.size()), k4(z.size()), tmp(z.size());
    for (std::size_t s = 0; s < steps; ++s) {
        rhs(z, k1);
        for (std::size_t i = 0; i < z.size(); ++i) tmp[i] = z[i] + 0.5 * step * k1[i];
        rhs(tmp, k2);
        for (std::size_t i = 0; i < z.size(); ++i) tmp[i] = z[i] + 0.5 * step * k2[i];
        rhs(tmp, k3);
        for (std::size_t i = 0; i < z.size(); ++i) tmp[i] = z[i] + step * k3[i];
        rhs(tmp, k4);
        for (std::size_t i = 0; i < z.size(); ++i) {
            z[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        z[layout.time(axis)] = origin + static_cast<double>(s + 1) * step;
        for (double v : z) {
            if (!std::isfinite(v)) throw NumericalError("all-times grid integration: non-finite state");
        }
    }
}

}  // namespace

GridSolution::GridSolution(VariableLayout layout, std::vector<double> t1, std::vector<double> t2)
    : layout_(std::move(layout)),
      t1_(std::move(t1)),
      t2_(std::move(t2)),
      data_(t1_.size() * t2_.size() * layout_.size(), 0.0) {}

std::span<const double> GridSolution::node(std::size_t i1, std::size_t i2) const {
    return {data_.data() + (i1 * t2_.size() + i2) * layout_.size(), layout_.size()};
}

std::span<double> GridSolution::node(std::size_t i1, std::size_t i2) {
    return {data_.data() + (i1 * t2_.size() + i2) * layout_.size(), layout_.size()};
}

double GridSolution::max_position_rate(std::size_t j, std::size_t axis) const {
    if (axis > 1) throw DimensionError("grid axis must be 0 (t1) or 1 (t2)");
    const std::vector<double>& ts = axis == 0 ? t1_ : t2_;
    const std::size_t len = ts.size();
    if (len < 2) return 0.0;
    double worst = 0.0;
    const std::size_t other = axis == 0 ? t2_.size() : t1_.size();
    for (std::size_t o = 0; o < other; ++o) {
        for (std::size_t i = 0; i < len; ++i) {
            const std::size_t lo = i == 0 ? 0 : i - 1;
            const std::size_t hi = i + 1 == len ? i : i + 1;
            auto at = [&](std::size_t idx) { return axis == 0 ? node(idx, o) : node(o, idx); };
            for (std::size_t k = 0; k < layout_.dim(); ++k) {
                const std::size_t slot = layout_.position(j, k);
                const double rate = (at(hi)[slot] - at(lo)[slot]) / (ts[hi] - ts[lo]);
                worst = std::max(worst, std::fabs(rate));
            }
        }
    }
    return worst;
}

GridSolution evolve_full_grid(const HamiltonianFunction& h1, const HamiltonianFunction& h2,
                              const PhasePoint& init, const GridSpec& grid, double dt) {
    require_two_times(h1, h2);
    if (grid.cells1 == 0 || grid.cells2 == 0) throw DimensionError("grid needs at least one cell per axis");
    if (!(dt > 0.0)) throw DimensionError("grid dt must be positive");
    const VariableLayout& layout = h1.layout();
    const std::vector<double> z0 = pack(layout, init);

    std::vector<double> t1(grid.cells1 + 1);
    std::vector<double> t2(grid.cells2 + 1);
    const double c1 = grid.t1_extent / static_cast<double>(grid.cells1);
    const double c2 = grid.t2_extent / static_cast<double>(grid.cells2);
    for (std::size_t i = 0; i <= grid.cells1; ++i) t1[i] = init.times[0] + static_cast<double>(i) * c1;
    for (std::size_t i = 0; i <= grid.cells2; ++i) t2[i] = init.times[1] + static_cast<double>(i) * c2;

    GridSolution sol(layout, t1, t2);
    const std::size_t m1 = substeps_for(c1, dt);
    const std::size_t m2 = substeps_for(c2, dt);

    std::vector<double> z = z0;
    std::copy(z.begin(), z.end(), sol.node(0, 0).begin());
    for (std::size_t i2 = 1; i2 <= grid.cells2; ++i2) {
        integrate_leg(h2, z, 1, c2, m2);
        z[layout.time(1)] = t2[i2];
        std::copy(z.begin(), z.end(), sol.node(0, i2).begin());
    }
    for (std::size_t i2 = 0; i2 <= grid.cells2; ++i2) {
        const auto start = sol.node(0, i2);
        z.assign(start.begin(), start.end());
        for (std::size_t i1 = 1; i1 <= grid.cells1; ++i1) {
            integrate_leg(h1, z, 0, c1, m1);
            z[layout.time(0)] = t1[i1];
            std::copy(z.begin(), z.end(), sol.node(i1, i2).begin());
        }
    }
    return sol;
}

double grid_path_independence(const HamiltonianFunction& h1, const HamiltonianFunction& h2,
                              const PhasePoint& init, double a, double b, double dt) {
    require_two_times(h1, h2);
    if (!(dt > 0.0)) throw DimensionError("grid dt must be positive");
    const VariableLayout& layout = h1.layout();
    const std::vector<double> z0 = pack(layout, init);
    const std::size_t ma = substeps_for(a, dt);
    const std::size_t mb = substeps_for(b, dt);

    std::vector<double> first = z0;
    integrate_leg(h1, first, 0, a, ma);
    integrate_leg(h2, first, 1, b, mb);

    std::vector<double> second = z0;
    integrate_leg(h2, second, 1, b, mb);
    integrate_leg(h1, second, 0, a, ma);

    double sum = 0.0;
    for (std::size_t j = 0; j < layout.particles(); ++j) {
        for (std::size_t k = 0; k < layout.dim(); ++k) {
            const double dx = first[layout.position(j, k)] - second[layout.position(j, k)];
            const double dp = first[layout.momentum(j, k)] - second[layout.momentum(j, k)];
            sum += dx * dx + dp * dp;
        }
    }
    return std::sqrt(sum);
}

}  // namespace multitime::classical
