#pragma once

// Multi-time classical mechanics:
//   dx_j/dt_j = v_j(t_1, x_1, p_1, ..., t_n, x_n, p_n)
//   dp_j/dt_j = w_j(...)
// together with the flow-commutation consistency condition, validity tests of
// sampled n-paths, the all-times grid system, and a no-interaction demo.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "multitime/defect.hpp"
#include "multitime/layout.hpp"
#include "multitime/npath.hpp"
#include "multitime/spacetime.hpp"

namespace multitime::classical {

using ScalarFunction = std::function<double(std::span<const double>)>;
using TimeTuple = std::vector<double>;

struct PhasePoint {
    TimeTuple times;
    std::vector<std::vector<double>> positions;  // [particle][component]
    std::vector<std::vector<double>> momenta;

    static PhasePoint equal_time(double t, std::vector<std::vector<double>> positions,
                                 std::vector<std::vector<double>> momenta);

    std::size_t particles() const noexcept { return positions.size(); }
};

/// Flattens a phase point into the layout's variable order.
std::vector<double> pack(const VariableLayout& layout, const PhasePoint& point);
PhasePoint unpack(const VariableLayout& layout, std::span<const double> z);

/// Sum of expression terms with optional analytic partial derivatives.
/// Partial derivatives without an override use central differences with the
/// default step (or `step` when positive).
class HamiltonianFunction {
public:
    HamiltonianFunction(const VariableLayout& layout, const std::vector<std::string>& terms,
                        const std::map<std::string, std::string>& gradients = {}, double step = 0.0);

    double operator()(std::span<const double> z) const;
    double derivative(std::size_t slot, std::span<const double> z) const;

    const VariableLayout& layout() const noexcept { return layout_; }
    double step() const noexcept { return step_; }
    bool has_analytic(std::size_t slot) const { return analytic_.count(slot) != 0; }

private:
    VariableLayout layout_;
    std::vector<expr::CompiledExpression> terms_;
    std::map<std::size_t, expr::CompiledExpression> analytic_;
    double step_;
};

class PhaseVectorField {
public:
    /// `velocity` and `force` hold n*d component functions indexed j*d + k.
    PhaseVectorField(std::size_t particles, std::size_t dim, std::vector<double> masses,
                     std::vector<ScalarFunction> velocity, std::vector<ScalarFunction> force);

    /// v[j][k], w[j][k] as expressions in t1..tn, xJ_D, pJ_D.
    static PhaseVectorField from_expressions(std::size_t particles, std::size_t dim,
                                             std::vector<double> masses,
                                             const std::vector<std::vector<std::string>>& v,
                                             const std::vector<std::vector<std::string>>& w);

    const VariableLayout& layout() const noexcept { return layout_; }
    std::size_t particles() const noexcept { return layout_.particles(); }
    std::size_t dim() const noexcept { return layout_.dim(); }
    const std::vector<double>& masses() const noexcept { return masses_; }

    double velocity(std::size_t j, std::size_t k, std::span<const double> z) const {
        return velocity_[j * dim() + k](z);
    }
    double force(std::size_t j, std::size_t k, std::span<const double> z) const {
        return force_[j * dim() + k](z);
    }
    const ScalarFunction& velocity_component(std::size_t j, std::size_t k) const {
        return velocity_[j * dim() + k];
    }
    const ScalarFunction& force_component(std::size_t j, std::size_t k) const {
        return force_[j * dim() + k];
    }

private:
    VariableLayout layout_;
    std::vector<double> masses_;
    std::vector<ScalarFunction> velocity_;
    std::vector<ScalarFunction> force_;
};

/// v_j = grad_{p_j} H, w_j = -grad_{x_j} H.
PhaseVectorField hamiltonian_vector_field(const HamiltonianFunction& h, std::vector<double> masses);

inline constexpr double kDefaultDirectionalStep = 1e-4;

/// For every ordered pair j != k: sup norm of (D_j v_k, D_j w_k) with
/// D_j = d/dt_j + v_j . grad_{x_j} + w_j . grad_{p_j}.
DefectReport classical_consistency_defect(const PhaseVectorField& field, const PhasePoint& point,
                                          double h = kDefaultDirectionalStep);

/// Classic RK4 with all times advanced together from an equal-time initial point.
NPath evolve_equal_time(const PhaseVectorField& field, const PhasePoint& init, double span, double dt);

struct SampleResidual {
    TimeTuple times;
    std::vector<double> per_particle;
    double max = 0.0;
};

struct ResidualReport {
    std::vector<SampleResidual> accepted;
    std::vector<TimeTuple> rejected;  // samples whose lifted configuration is not spacelike
    double max = 0.0;
};

/// Lifts each time tuple onto the n-path and compares the interpolated
/// derivatives with the field: r_j = |dx_j/dt_j - v_j| + |dp_j/dt_j - w_j|.
ResidualReport validity_residual(const PhaseVectorField& field, const NPath& path,
                                 std::span<const TimeTuple> samples);

// ---------------------------------------------------------------------------
// All-times system for two particles:
//   dx_j/dt_k = grad_{p_j} H_k,  dp_j/dt_k = -grad_{x_j} H_k.

struct GridSpec {
    double t1_extent = 1.0;
    double t2_extent = 1.0;
    std::size_t cells1 = 10;
    std::size_t cells2 = 10;
};

class GridSolution {
public:
    GridSolution(VariableLayout layout, std::vector<double> t1, std::vector<double> t2);

    const std::vector<double>& t1() const noexcept { return t1_; }
    const std::vector<double>& t2() const noexcept { return t2_; }
    const VariableLayout& layout() const noexcept { return layout_; }

    /// Full layout vector (times, positions, momenta) at node (i1, i2).
    std::span<const double> node(std::size_t i1, std::size_t i2) const;
    std::span<double> node(std::size_t i1, std::size_t i2);

    double position(std::size_t i1, std::size_t i2, std::size_t j, std::size_t k) const {
        return node(i1, i2)[layout_.position(j, k)];
    }

    /// max over the grid and components of |d x_j / d t_axis|, by central
    /// differences of the stored grid (one-sided at the edges).
    double max_position_rate(std::size_t j, std::size_t axis) const;

private:
    VariableLayout layout_;
    std::vector<double> t1_;
    std::vector<double> t2_;
    std::vector<double> data_;
};

/// Integrates the t2 column at t1 = t1(0) first, then every t1 row, with RK4
/// substeps no longer than dt.
GridSolution evolve_full_grid(const HamiltonianFunction& h1, const HamiltonianFunction& h2,
                              const PhasePoint& init, const GridSpec& grid, double dt);

/// Phase-space distance between "t1 leg then t2 leg" and "t2 leg then t1 leg"
/// to the far corner of an a x b rectangle.
double grid_path_independence(const HamiltonianFunction& h1, const HamiltonianFunction& h2,
                              const PhasePoint& init, double a, double b, double dt);

// ---------------------------------------------------------------------------

struct CjsMember {
    std::string id;
    PhaseVectorField field;
};

struct CjsOptions {
    std::vector<double> rapidities{0.0};
    std::size_t samples = 50;  // base configurations, each boosted by every rapidity
    std::uint64_t seed = 1;
    double time_range = 1.0;
    double position_range = 2.0;
    double momentum_range = 1.0;
    double step = kDefaultDirectionalStep;
    PhasePoint world_line_init;
    double span = 5.0;
    double dt = 1e-2;
};

struct CjsRow {
    std::string id;
    double max_defect = 0.0;
    double min_defect = 0.0;
    double chord_deviation = 0.0;
    std::size_t points = 0;
};

/// Spacelike sample configurations for the demo: random base points in the
/// configured box, boosted by each rapidity (on-shell momenta per member mass).
std::vector<PhasePoint> cjs_sample_points(std::size_t particles, std::size_t dim,
                                          std::span<const double> masses, const CjsOptions& opts);

std::vector<CjsRow> cjs_demo(std::span<const CjsMember> family, const CjsOptions& opts);

}  // namespace multitime::classical
