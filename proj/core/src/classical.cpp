#include "multitime/classical.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "multitime/errors.hpp"
#include "multitime/numdiff.hpp"

namespace multitime::classical {

namespace {

void require_finite(std::span<const double> z, const char* where) {
    for (double v : z) {
        if (!std::isfinite(v)) throw NumericalError(std::string(where) + ": non-finite state");
    }
}

double norm2(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

}  // namespace

PhasePoint PhasePoint::equal_time(double t, std::vector<std::vector<double>> positions,
                                  std::vector<std::vector<double>> momenta) {
    PhasePoint p;
    p.times.assign(positions.size(), t);
    p.positions = std::move(positions);
    p.momenta = std::move(momenta);
    return p;
}

std::vector<double> pack(const VariableLayout& layout, const PhasePoint& point) {
    const std::size_t n = layout.particles();
    const std::size_t d = layout.dim();
    if (point.times.size() != n || point.positions.size() != n || point.momenta.size() != n) {
        throw DimensionError("phase point has the wrong number of particles");
    }
    std::vector<double> z(layout.size(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        if (point.positions[j].size() != d || point.momenta[j].size() != d) {
            throw DimensionError("phase point component has the wrong spatial dimension");
        }
        z[layout.time(j)] = point.times[j];
        for (std::size_t k = 0; k < d; ++k) {
            z[layout.position(j, k)] = point.positions[j][k];
            z[layout.momentum(j, k)] = point.momenta[j][k];
        }
    }
    return z;
}

PhasePoint unpack(const VariableLayout& layout, std::span<const double> z) {
    const std::size_t n = layout.particles();
    const std::size_t d = layout.dim();
    PhasePoint p;
    p.times.resize(n);
    p.positions.assign(n, std::vector<double>(d));
    p.momenta.assign(n, std::vector<double>(d));
    for (std::size_t j = 0; j < n; ++j) {
        p.times[j] = z[layout.time(j)];
        for (std::size_t k = 0; k < d; ++k) {
            p.positions[j][k] = z[layout.position(j, k)];
            p.momenta[j][k] = z[layout.momentum(j, k)];
        }
    }
    return p;
}

// ---------------------------------------------------------------------------

HamiltonianFunction::HamiltonianFunction(const VariableLayout& layout,
                                         const std::vector<std::string>& terms,
                                         const std::map<std::string, std::string>& gradients,
                                         double step)
    : layout_(layout), step_(step) {
    if (terms.empty()) throw DimensionError("Hamiltonian needs at least one term");
    for (const auto& t : terms) terms_.push_back(layout_.compile(t));
    for (const auto& [name, source] : gradients) {
        const auto slot = layout_.find(name);
        if (!slot) throw UnboundVariableError(name);
        analytic_.emplace(*slot, layout_.compile(source));
    }
}

double HamiltonianFunction::operator()(std::span<const double> z) const {
    double sum = 0.0;
    for (const auto& t : terms_) sum += t(z);
    return sum;
}

double HamiltonianFunction::derivative(std::size_t slot, std::span<const double> z) const {
    if (const auto it = analytic_.find(slot); it != analytic_.end()) return it->second(z);
    bool depends = false;
    for (const auto& t : terms_) depends = depends || t.depends_on(slot);
    if (!depends) return 0.0;
    const double h = step_ > 0.0 ? step_ : default_step(z[slot]);
    return partial_difference(*this, z, slot, h);
}

// ---------------------------------------------------------------------------

PhaseVectorField::PhaseVectorField(std::size_t particles, std::size_t dim,
                                   std::vector<double> masses, std::vector<ScalarFunction> velocity,
                                   std::vector<ScalarFunction> force)
    : layout_(particles, dim),
      masses_(std::move(masses)),
      velocity_(std::move(velocity)),
      force_(std::move(force)) {
    if (particles == 0 || dim == 0 || dim > 3) {
        throw DimensionError("PhaseVectorField: need n >= 1 and 1 <= d <= 3");
    }
    if (masses_.size() != particles) throw DimensionError("PhaseVectorField: one mass per particle");
    for (double m : masses_) {
        if (!(m > 0.0)) throw DimensionError("PhaseVectorField: masses must be positive");
    }
    if (velocity_.size() != particles * dim || force_.size() != particles * dim) {
        throw DimensionError("PhaseVectorField: expected n*d velocity and force components");
    }
}

PhaseVectorField PhaseVectorField::from_expressions(std::size_t particles, std::size_t dim,
                                                    std::vector<double> masses,
                                                    const std::vector<std::vector<std::string>>& v,
                                                    const std::vector<std::vector<std::string>>& w) {
    const VariableLayout layout(particles, dim);
    if (v.size() != particles || w.size() != particles) {
        throw DimensionError("vector field needs v and w for every particle");
    }
    std::vector<ScalarFunction> vel;
    std::vector<ScalarFunction> frc;
    for (std::size_t j = 0; j < particles; ++j) {
        if (v[j].size() != dim || w[j].size() != dim) {
            throw DimensionError("vector field component count must equal the dimension");
        }
        for (std::size_t k = 0; k < dim; ++k) {
            vel.emplace_back(layout.compile(v[j][k]));
            frc.emplace_back(layout.compile(w[j][k]));
        }
    }
    return PhaseVectorField(particles, dim, std::move(masses), std::move(vel), std::move(frc));
}

PhaseVectorField hamiltonian_vector_field(const HamiltonianFunction& h, std::vector<double> masses) {
    const auto shared = std::make_shared<const HamiltonianFunction>(h);
    const VariableLayout& layout = h.layout();
    std::vector<ScalarFunction> vel;
    std::vector<ScalarFunction> frc;
    for (std::size_t j = 0; j < layout.particles(); ++j) {
        for (std::size_t k = 0; k < layout.dim(); ++k) {
            const std::size_t ps = layout.momentum(j, k);
            const std::size_t xs = layout.position(j, k);
            vel.emplace_back([shared, ps](std::span<const double> z) { return shared->derivative(ps, z); });
            frc.emplace_back([shared, xs](std::span<const double> z) { return -shared->derivative(xs, z); });
        }
    }
    return PhaseVectorField(layout.particles(), layout.dim(), std::move(masses), std::move(vel),
                            std::move(frc));
}

// ---------------------------------------------------------------------------

DefectReport classical_consistency_defect(const PhaseVectorField& field, const PhasePoint& point,
                                          double h) {
    const VariableLayout& layout = field.layout();
    const std::size_t n = field.particles();
    const std::size_t d = field.dim();
    const std::vector<double> z = pack(layout, point);
    DefectReport report;
    report.step = h;
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> dir(layout.size(), 0.0);
        dir[layout.time(j)] = 1.0;
        for (std::size_t c = 0; c < d; ++c) {
            dir[layout.position(j, c)] = field.velocity(j, c, z);
            dir[layout.momentum(j, c)] = field.force(j, c, z);
        }
        for (std::size_t k = 0; k < n; ++k) {
            if (k == j) continue;
            double sup = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                sup = std::max(sup, std::fabs(directional_difference(field.velocity_component(k, c), z, dir, h)));
                sup = std::max(sup, std::fabs(directional_difference(field.force_component(k, c), z, dir, h)));
            }
            report.add(j, k, sup);
        }
    }
    return report;
}

NPath evolve_equal_time(const PhaseVectorField& field, const PhasePoint& init, double span, double dt) {
    if (!(dt > 0.0) || !(span > 0.0)) throw DimensionError("evolve_equal_time: span and dt must be positive");
    const VariableLayout& layout = field.layout();
    const std::size_t n = field.particles();
    const std::size_t d = field.dim();
    for (double t : init.times) {
        if (t != init.times.front()) throw DimensionError("evolve_equal_time: initial times must be equal");
    }
    const auto steps = static_cast<std::size_t>(std::llround(span / dt));
    if (steps == 0) throw DimensionError("evolve_equal_time: span shorter than one step");
    const double step = span / static_cast<double>(steps);
    const double t0 = init.times.front();

    auto rhs = [&](std::span<const double> z, std::vector<double>& out) {
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            out[layout.time(j)] = 1.0;
            for (std::size_t k = 0; k < d; ++k) {
                out[layout.position(j, k)] = field.velocity(j, k, z);
                out[layout.momentum(j, k)] = field.force(j, k, z);
            }
        }
    };

    NPath path;
    path.lines.assign(n, WorldLine(d));
    std::vector<bool> warned(n, false);
    std::vector<double> z = pack(layout, init);
    std::vector<double> f(layout.size());

    auto record = [&](std::span<const double> state, std::span<const double> deriv, double t) {
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t px = layout.position(j, 0);
            const std::size_t pp = layout.momentum(j, 0);
            path.lines[j].append(t, state.subspan(px, d), state.subspan(pp, d), deriv.subspan(px, d),
                                 deriv.subspan(pp, d));
            if (!warned[j] && norm2(deriv.subspan(px, d)) >= 1.0) {
                warned[j] = true;
                std::ostringstream msg;
                msg << "particle " << (j + 1) << " reaches |dx/dt| >= 1 at t = " << t
                    << " (world line not timelike)";
                path.warnings.push_back(msg.str());
            }
        }
    };

    rhs(z, f);
    record(z, f, t0);
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
        const double t = t0 + static_cast<double>(s + 1) * step;
        for (std::size_t j = 0; j < n; ++j) z[layout.time(j)] = t;
        require_finite(z, "evolve_equal_time");
        rhs(z, f);
        record(z, f, t);
    }
    return path;
}

ResidualReport validity_residual(const PhaseVectorField& field, const NPath& path,
                                 std::span<const TimeTuple> samples) {
    const VariableLayout& layout = field.layout();
    const std::size_t n = field.particles();
    const std::size_t d = field.dim();
    if (path.particles() != n || path.dim() != d) {
        throw DimensionError("validity_residual: n-path does not match the field's n and d");
    }
    ResidualReport report;
    for (const TimeTuple& times : samples) {
        if (times.size() != n) throw DimensionError("validity_residual: sample has the wrong length");
        std::vector<SpacetimePoint> config(n);
        PhasePoint lifted;
        lifted.times = times;
        for (std::size_t j = 0; j < n; ++j) {
            const WorldLine& line = path.lines[j];
            if (!line.covers(times[j])) {
                throw OutOfRangeError("validity sample t" + std::to_string(j + 1) + " = " +
                                      std::to_string(times[j]) + " outside the n-path's range");
            }
            lifted.positions.push_back(line.position(times[j]));
            lifted.momenta.push_back(line.momentum(times[j]));
            config[j] = {times[j], lifted.positions.back()};
        }
        if (!is_spacelike(config)) {
            report.rejected.push_back(times);
            continue;
        }
        const std::vector<double> z = pack(layout, lifted);
        SampleResidual row;
        row.times = times;
        for (std::size_t j = 0; j < n; ++j) {
            const auto vel = path.lines[j].velocity(times[j]);
            const auto rate = path.lines[j].momentum_rate(times[j]);
            double dv = 0.0;
            double dw = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double a = vel[k] - field.velocity(j, k, z);
                const double b = rate[k] - field.force(j, k, z);
                dv += a * a;
                dw += b * b;
            }
            const double r = std::sqrt(dv) + std::sqrt(dw);
            row.per_particle.push_back(r);
            row.max = std::max(row.max, r);
        }
        report.max = std::max(report.max, row.max);
        report.accepted.push_back(std::move(row));
    }
    return report;
}

}  // namespace multitime::classical
