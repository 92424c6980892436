#include "multitime/hamilton_jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "multitime/errors.hpp"
#include "multitime/numdiff.hpp"

namespace multitime::hj {

namespace {

double step_or_default(double h, double x) { return h > 0.0 ? h : default_step(x); }

void reject_momenta(const expr::Expression& e, const VariableLayout& layout, const char* what) {
    for (std::size_t j = 0; j < layout.particles(); ++j) {
        for (std::size_t k = 0; k < layout.dim(); ++k) {
            if (e.free_variables().count(VariableLayout::momentum_name(j, k)) != 0) {
                throw UnboundVariableError(std::string(what) + " must not depend on momentum " +
                                           VariableLayout::momentum_name(j, k));
            }
        }
    }
}

double derivative_of(const HamiltonianFunction& f, std::size_t slot, std::span<const double> z,
                     double h) {
    if (h > 0.0 && !f.has_analytic(slot)) return partial_difference(f, z, slot, h);
    return f.derivative(slot, z);
}

}  // namespace

// ---------------------------------------------------------------------------

HJFunction::HJFunction(std::size_t particles, std::size_t dim, std::vector<double> masses,
                       const std::string& source, double step)
    : layout_(particles, dim), masses_(std::move(masses)), source_(source), step_(step) {
    if (particles == 0 || dim == 0) throw DimensionError("HJFunction: need n >= 1 and d >= 1");
    if (masses_.size() != particles) throw DimensionError("HJFunction: one mass per particle");
    for (double m : masses_) {
        if (!(m > 0.0)) throw DimensionError("HJFunction: masses must be positive");
    }
    const expr::Expression e = expr::parse_expression(source);
    reject_momenta(e, layout_, "S");
    s_ = layout_.compile(e);
}

double HJFunction::derivative(std::size_t slot, std::span<const double> z) const {
    if (!s_.depends_on(slot)) return 0.0;
    return partial_difference(s_, z, slot, step_or_default(step_, z[slot]));
}

std::vector<double> HJFunction::pack(const ConfigurationPoint& point) const {
    PhasePoint p;
    p.times = point.times;
    p.positions = point.positions;
    p.momenta.assign(point.positions.size(), std::vector<double>(dim(), 0.0));
    return classical::pack(layout_, p);
}

HamiltonianFunctionSet::HamiltonianFunctionSet(std::size_t particles, std::size_t dim,
                                               const std::vector<std::string>& partials,
                                               std::optional<std::string> total, double step)
    : layout_(particles, dim, true) {
    if (partials.size() != particles) {
        throw DimensionError("HamiltonianFunctionSet: expected " + std::to_string(particles) +
                             " partial Hamiltonians");
    }
    for (const auto& src : partials) partials_.emplace_back(layout_, std::vector<std::string>{src}, std::map<std::string, std::string>{}, step);
    if (total) total_.emplace(layout_, std::vector<std::string>{*total}, std::map<std::string, std::string>{}, step);
}

std::vector<double> HamiltonianFunctionSet::pack(const PhasePoint& point) const {
    std::vector<double> z = classical::pack(layout_, point);
    z[*layout_.single_time()] = point.times.empty() ? 0.0 : point.times.front();
    return z;
}

// ---------------------------------------------------------------------------

double poisson_bracket(const VariableLayout& layout, const ScalarFunction& f, const ScalarFunction& g,
                       std::span<const double> z, double h) {
    double sum = 0.0;
    for (std::size_t j = 0; j < layout.particles(); ++j) {
        for (std::size_t c = 0; c < layout.dim(); ++c) {
            const std::size_t xs = layout.position(j, c);
            const std::size_t ps = layout.momentum(j, c);
            const double hx = step_or_default(h, z[xs]);
            const double hp = step_or_default(h, z[ps]);
            const double fx = partial_difference(f, z, xs, hx);
            const double fp = partial_difference(f, z, ps, hp);
            const double gx = partial_difference(g, z, xs, hx);
            const double gp = partial_difference(g, z, ps, hp);
            sum += fx * gp - fp * gx;
        }
    }
    return sum;
}

double poisson_bracket(std::size_t particles, std::size_t dim, const std::string& f,
                       const std::string& g, const PhasePoint& point, double h) {
    const VariableLayout layout(particles, dim);
    const auto cf = layout.compile(f);
    const auto cg = layout.compile(g);
    const auto z = classical::pack(layout, point);
    return poisson_bracket(layout, cf, cg, z, h);
}

double hj_residual_single(const std::string& s, const std::string& h, std::size_t dim, double t,
                          const std::vector<std::vector<double>>& positions, double step) {
    const std::size_t n = positions.size();
    const VariableLayout layout(n, dim, true);
    const expr::Expression se = expr::parse_expression(s);
    reject_momenta(se, layout, "S");
    for (std::size_t j = 0; j < n; ++j) {
        if (se.free_variables().count(VariableLayout::time_name(j)) != 0) {
            throw UnboundVariableError("single-time S must use 't', not " + VariableLayout::time_name(j));
        }
    }
    const auto sc = layout.compile(se);
    const auto hc = layout.compile(h);

    PhasePoint p = PhasePoint::equal_time(t, positions, std::vector<std::vector<double>>(n, std::vector<double>(dim, 0.0)));
    std::vector<double> z = classical::pack(layout, p);
    const std::size_t ts = *layout.single_time();
    z[ts] = t;

    const double dsdt = partial_difference(sc, z, ts, step_or_default(step, t));
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t c = 0; c < dim; ++c) {
            const std::size_t xs = layout.position(j, c);
            z[layout.momentum(j, c)] = partial_difference(sc, z, xs, step_or_default(step, z[xs]));
        }
    }
    return std::fabs(dsdt + hc(z));
}

std::vector<double> hj_residual_multi(const HJFunction& s, const HamiltonianFunctionSet& hs,
                                      const ConfigurationPoint& point) {
    if (s.particles() != hs.particles() || s.dim() != hs.dim()) {
        throw DimensionError("hj_residual_multi: S and H_j disagree on n or d");
    }
    const std::size_t n = s.particles();
    const std::size_t d = s.dim();
    const std::vector<double> zs = s.pack(point);
    PhasePoint p;
    p.times = point.times;
    p.positions = point.positions;
    p.momenta.assign(n, std::vector<double>(d));
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t c = 0; c < d; ++c) p.momenta[j][c] = s.derivative(s.layout().position(j, c), zs);
    }
    const std::vector<double> zh = hs.pack(p);
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double dsdt = s.derivative(s.layout().time(j), zs);
        out[j] = std::fabs(dsdt + hs.partial(j)(zh));
    }
    return out;
}

double poisson_defect(const HamiltonianFunctionSet& hs, std::span<const double> z, std::size_t j,
                      std::size_t k, double h) {
    const VariableLayout& layout = hs.layout();
    const HamiltonianFunction& hj = hs.partial(j);
    const HamiltonianFunction& hk = hs.partial(k);
    const double dk_dtj = derivative_of(hk, layout.time(j), z, h);
    const double dj_dtk = derivative_of(hj, layout.time(k), z, h);
    double bracket = 0.0;
    for (std::size_t l = 0; l < layout.particles(); ++l) {
        for (std::size_t c = 0; c < layout.dim(); ++c) {
            const std::size_t xs = layout.position(l, c);
            const std::size_t ps = layout.momentum(l, c);
            bracket += derivative_of(hj, xs, z, h) * derivative_of(hk, ps, z, h) -
                       derivative_of(hj, ps, z, h) * derivative_of(hk, xs, z, h);
        }
    }
    return dk_dtj - dj_dtk - bracket;
}

DefectReport hj_consistency_defect(const HamiltonianFunctionSet& hs, const PhasePoint& point, double h) {
    const std::vector<double> z = hs.pack(point);
    DefectReport report;
    report.step = h > 0.0 ? h : kDefaultRelativeStep;
    for (std::size_t j = 0; j < hs.particles(); ++j) {
        for (std::size_t k = j + 1; k < hs.particles(); ++k) {
            report.add(j, k, std::fabs(poisson_defect(hs, z, j, k, h)));
        }
    }
    return report;
}

double defect_flow_norm(const HamiltonianFunctionSet& hs, const PhasePoint& point, std::size_t j,
                        std::size_t k, double h) {
    const VariableLayout& layout = hs.layout();
    const std::vector<double> z = hs.pack(point);
    auto defect = [&](std::span<const double> zz) { return poisson_defect(hs, zz, j, k); };
    double sum = 0.0;
    for (std::size_t l = 0; l < layout.particles(); ++l) {
        for (std::size_t c = 0; c < layout.dim(); ++c) {
            for (std::size_t slot : {layout.position(l, c), layout.momentum(l, c)}) {
                const double g = partial_difference(defect, z, slot, h);
                sum += g * g;
            }
        }
    }
    return std::sqrt(sum);
}

double equal_time_sum_gap(const HamiltonianFunctionSet& hs, const PhasePoint& point) {
    if (!hs.total()) throw DimensionError("equal_time_sum_gap: no single-time H configured");
    PhasePoint p = point;
    const double t = point.times.front();
    std::fill(p.times.begin(), p.times.end(), t);
    const std::vector<double> z = hs.pack(p);
    double sum = 0.0;
    for (std::size_t j = 0; j < hs.particles(); ++j) sum += hs.partial(j)(z);
    return std::fabs(sum - (*hs.total())(z));
}

double mixed_partial_asymmetry(const HJFunction& s, const ConfigurationPoint& point, double h) {
    const VariableLayout& layout = s.layout();
    const std::vector<double> z = s.pack(point);
    std::vector<std::size_t> slots;
    for (std::size_t j = 0; j < layout.particles(); ++j) {
        slots.push_back(layout.time(j));
        for (std::size_t c = 0; c < layout.dim(); ++c) slots.push_back(layout.position(j, c));
    }
    auto nested = [&](std::size_t outer, double ho, std::size_t inner, double hi) {
        auto g = [&](std::span<const double> zz) { return partial_difference(s, zz, inner, hi); };
        return partial_difference(g, z, outer, ho);
    };
    double worst = 0.0;
    for (std::size_t a = 0; a < slots.size(); ++a) {
        for (std::size_t b = a + 1; b < slots.size(); ++b) {
            const double ab = nested(slots[a], 2.0 * h, slots[b], h);
            const double ba = nested(slots[b], 2.0 * h, slots[a], h);
            worst = std::max(worst, std::fabs(ab - ba));
        }
    }
    return worst;
}

VelocityDefect hj_velocity_consistency_defect(const HJFunction& s, const ConfigurationPoint& point,
                                              double h) {
    const VariableLayout& layout = s.layout();
    const std::size_t n = s.particles();
    const std::size_t d = s.dim();
    const std::vector<double> z = s.pack(point);
    VelocityDefect out;
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> dir(layout.size(), 0.0);
        dir[layout.time(j)] = 1.0;
        for (std::size_t c = 0; c < d; ++c) {
            dir[layout.position(j, c)] = s.derivative(layout.position(j, c), z) / s.masses()[j];
        }
        for (std::size_t k = 0; k < n; ++k) {
            if (k == j) continue;
            for (std::size_t c = 0; c < d; ++c) {
                const std::size_t slot = layout.position(k, c);
                auto grad_k = [&](std::span<const double> zz) { return partial_difference(s, zz, slot, h); };
                out.value = std::max(out.value, std::fabs(directional_difference(grad_k, z, dir, h)));
            }
        }
    }
    if (n > 1) {
        out.smoothness = mixed_partial_asymmetry(s, point, h);
        out.smoothness_warning = out.smoothness > kSmoothnessWarning;
    }
    return out;
}

// ---------------------------------------------------------------------------

double Foliation::time_on_leaf(double s, std::span<const double> x) const {
    double dot = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) dot += u[c] * x[c];
    return s + dot;
}

NPath hj_trajectories_foliation(const HJFunction& s, const Foliation& fol,
                                const std::vector<std::vector<double>>& init, double s0, double span,
                                double ds) {
    const VariableLayout& layout = s.layout();
    const std::size_t n = s.particles();
    const std::size_t d = s.dim();
    if (fol.u.size() != d) throw DimensionError("foliation boost velocity has the wrong dimension");
    double u2 = 0.0;
    for (double c : fol.u) u2 += c * c;
    if (!(u2 < 1.0)) throw DimensionError("foliation boost velocity must satisfy |u| < 1");
    if (init.size() != n) throw DimensionError("hj_trajectories_foliation: one position per particle");
    if (!(ds > 0.0) || !(span > 0.0)) throw DimensionError("hj_trajectories_foliation: span and ds must be positive");
    const auto steps = static_cast<std::size_t>(std::llround(span / ds));
    if (steps == 0) throw DimensionError("hj_trajectories_foliation: span shorter than one step");
    const double step = span / static_cast<double>(steps);

    std::vector<double> x(n * d);
    for (std::size_t j = 0; j < n; ++j) {
        if (init[j].size() != d) throw DimensionError("initial position has the wrong dimension");
        std::copy(init[j].begin(), init[j].end(), x.begin() + static_cast<std::ptrdiff_t>(j * d));
    }

    // Layout vector of the on-leaf configuration at parameter sp.
    auto configuration = [&](double sp, std::span<const double> xs) {
        std::vector<double> z(layout.size(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            const auto xj = xs.subspan(j * d, d);
            z[layout.time(j)] = fol.time_on_leaf(sp, xj);
            for (std::size_t c = 0; c < d; ++c) z[layout.position(j, c)] = xj[c];
        }
        return z;
    };
    struct Kinematics {
        std::vector<double> z;
        std::vector<double> velocity;  // V_j, n*d
        std::vector<double> lapse;     // 1 - u . V_j
    };
    auto kinematics = [&](double sp, std::span<const double> xs) {
        Kinematics k{configuration(sp, xs), std::vector<double>(n * d), std::vector<double>(n)};
        for (std::size_t j = 0; j < n; ++j) {
            double dot = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                const double v = s.derivative(layout.position(j, c), k.z) / s.masses()[j];
                k.velocity[j * d + c] = v;
                dot += fol.u[c] * v;
            }
            k.lapse[j] = 1.0 - dot;
            if (!(k.lapse[j] > 0.0)) {
                std::ostringstream msg;
                msg << "leaf-crossing degeneracy: 1 - u.V = " << k.lapse[j] << " for particle " << (j + 1)
                    << " at s = " << sp << " (foliation " << (fol.id.empty() ? "?" : fol.id) << ")";
                throw NumericalError(msg.str());
            }
        }
        return k;
    };
    auto rhs = [&](double sp, std::span<const double> xs, std::vector<double>& out) {
        const Kinematics k = kinematics(sp, xs);
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t c = 0; c < d; ++c) out[j * d + c] = k.velocity[j * d + c] / k.lapse[j];
        }
    };

    NPath path;
    path.lines.assign(n, classical::WorldLine(d));
    auto record = [&](double sp, std::span<const double> xs) {
        const Kinematics k = kinematics(sp, xs);
        std::vector<double> dir(layout.size(), 0.0);
        for (std::size_t l = 0; l < n; ++l) {
            dir[layout.time(l)] = 1.0 / k.lapse[l];
            for (std::size_t c = 0; c < d; ++c) dir[layout.position(l, c)] = k.velocity[l * d + c] / k.lapse[l];
        }
        for (std::size_t j = 0; j < n; ++j) {
            std::vector<double> p(d), dp(d), v(d);
            for (std::size_t c = 0; c < d; ++c) {
                v[c] = k.velocity[j * d + c];
                p[c] = s.masses()[j] * v[c];
                const std::size_t slot = layout.position(j, c);
                auto grad = [&](std::span<const double> zz) {
                    return partial_difference(s, zz, slot, kDefaultSecondOrderStep);
                };
                dp[c] = directional_difference(grad, k.z, dir, kDefaultSecondOrderStep) * k.lapse[j];
            }
            path.lines[j].append(k.z[layout.time(j)], xs.subspan(j * d, d), p, v, dp);
        }
    };

    record(s0, x);
    std::vector<double> k1(x.size()), k2(x.size()), k3(x.size()), k4(x.size()), tmp(x.size());
    for (std::size_t i = 0; i < steps; ++i) {
        const double sp = s0 + static_cast<double>(i) * step;
        rhs(sp, x, k1);
        for (std::size_t q = 0; q < x.size(); ++q) tmp[q] = x[q] + 0.5 * step * k1[q];
        rhs(sp + 0.5 * step, tmp, k2);
        for (std::size_t q = 0; q < x.size(); ++q) tmp[q] = x[q] + 0.5 * step * k2[q];
        rhs(sp + 0.5 * step, tmp, k3);
        for (std::size_t q = 0; q < x.size(); ++q) tmp[q] = x[q] + step * k3[q];
        rhs(sp + step, tmp, k4);
        for (std::size_t q = 0; q < x.size(); ++q) {
            x[q] += step / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]);
            if (!std::isfinite(x[q])) throw NumericalError("hj_trajectories_foliation: non-finite position");
        }
        record(s0 + static_cast<double>(i + 1) * step, x);
    }
    return path;
}

double npath_distance(const NPath& a, const NPath& b, std::size_t grid_points) {
    if (a.particles() != b.particles() || a.dim() != b.dim()) {
        throw DimensionError("npath_distance: n-paths differ in n or d");
    }
    if (grid_points < 2) throw DimensionError("npath_distance: need at least two grid points");
    double worst = 0.0;
    for (std::size_t j = 0; j < a.particles(); ++j) {
        const auto& la = a.lines[j];
        const auto& lb = b.lines[j];
        const double lo = std::max(la.t_begin(), lb.t_begin());
        const double hi = std::min(la.t_end(), lb.t_end());
        if (!(hi > lo)) {
            throw OutOfRangeError("npath_distance: world lines of particle " + std::to_string(j + 1) +
                                  " share no time window");
        }
        for (std::size_t i = 0; i < grid_points; ++i) {
            const double t = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid_points - 1);
            const auto xa = la.position(t);
            const auto xb = lb.position(t);
            double d2 = 0.0;
            for (std::size_t c = 0; c < xa.size(); ++c) d2 += (xa[c] - xb[c]) * (xa[c] - xb[c]);
            worst = std::max(worst, std::sqrt(d2));
        }
    }
    return worst;
}

DivergenceReport foliation_compare(const HJFunction& s, const std::vector<Foliation>& foliations,
                                   const std::vector<std::vector<double>>& init, double s0,
                                   double span, double ds, std::size_t grid_points, double threshold) {
    if (foliations.size() < 2) throw DimensionError("foliation_compare: need >= 2 foliations");
    DivergenceReport report;
    report.threshold = threshold;
    report.grid_points = grid_points;
    std::vector<NPath> paths;
    for (std::size_t i = 0; i < foliations.size(); ++i) {
        const auto& f = foliations[i];
        report.ids.push_back(f.id.empty() ? "foliation_" + std::to_string(i + 1) : f.id);
        paths.push_back(hj_trajectories_foliation(s, f, init, s0, span, ds));
    }
    const std::size_t m = paths.size();
    report.distance.assign(m, std::vector<double>(m, 0.0));
    report.foliation_independent = true;
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
            const double dist = npath_distance(paths[a], paths[b], grid_points);
            report.distance[a][b] = dist;
            report.distance[b][a] = dist;
            if (!(dist < threshold)) report.foliation_independent = false;
        }
    }
    return report;
}

}  // namespace multitime::hj
