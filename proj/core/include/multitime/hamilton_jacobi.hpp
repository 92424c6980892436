#pragma once

// Multi-time Hamilton-Jacobi functions S(t_1, x_1, ..., t_n, x_n): residuals of
// the HJ systems, Poisson-bracket consistency of partial Hamiltonians, and the
// trajectories dx_j/dt_j = grad_{x_j} S / m_j restricted to flat foliations.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "multitime/classical.hpp"
#include "multitime/defect.hpp"
#include "multitime/layout.hpp"
#include "multitime/npath.hpp"

namespace multitime::hj {

using classical::HamiltonianFunction;
using classical::NPath;
using classical::PhasePoint;
using classical::ScalarFunction;
using TimeTuple = std::vector<double>;

/// (t_1..t_n; x_1..x_n) without momenta.
struct ConfigurationPoint {
    TimeTuple times;
    std::vector<std::vector<double>> positions;
};

inline constexpr double kDefaultSecondOrderStep = 1e-3;
inline constexpr double kSmoothnessWarning = 1e-4;

class HJFunction {
public:
    /// `source` may use t1..tn and xJ_D, not momenta.
    HJFunction(std::size_t particles, std::size_t dim, std::vector<double> masses,
               const std::string& source, double step = 0.0);

    std::size_t particles() const noexcept { return layout_.particles(); }
    std::size_t dim() const noexcept { return layout_.dim(); }
    const std::vector<double>& masses() const noexcept { return masses_; }
    const VariableLayout& layout() const noexcept { return layout_; }
    const std::string& source() const noexcept { return source_; }

    double operator()(std::span<const double> z) const { return s_(z); }
    /// Central difference in one layout slot (default step unless configured).
    double derivative(std::size_t slot, std::span<const double> z) const;

    std::vector<double> pack(const ConfigurationPoint& point) const;

private:
    VariableLayout layout_;
    std::vector<double> masses_;
    std::string source_;
    expr::CompiledExpression s_;
    double step_;
};

/// Partial Hamiltonians H_j(t1..tn, x, p) and optionally the single-time H(t, x, p).
class HamiltonianFunctionSet {
public:
    HamiltonianFunctionSet(std::size_t particles, std::size_t dim,
                           const std::vector<std::string>& partials,
                           std::optional<std::string> total = std::nullopt, double step = 0.0);

    std::size_t particles() const noexcept { return layout_.particles(); }
    std::size_t dim() const noexcept { return layout_.dim(); }
    const VariableLayout& layout() const noexcept { return layout_; }
    const HamiltonianFunction& partial(std::size_t j) const { return partials_.at(j); }
    const std::optional<HamiltonianFunction>& total() const noexcept { return total_; }

    /// Layout vector of a phase point; the single time `t` is set to t1.
    std::vector<double> pack(const PhasePoint& point) const;

private:
    VariableLayout layout_;
    std::vector<HamiltonianFunction> partials_;
    std::optional<HamiltonianFunction> total_;
};

/// sum_j grad_{x_j} f . grad_{p_j} g - grad_{p_j} f . grad_{x_j} g by central
/// differences; h <= 0 selects the default step per variable.
double poisson_bracket(const VariableLayout& layout, const ScalarFunction& f, const ScalarFunction& g,
                       std::span<const double> z, double h = 0.0);

/// Expression form over the (n, d) phase-space layout.
double poisson_bracket(std::size_t particles, std::size_t dim, const std::string& f,
                       const std::string& g, const PhasePoint& point, double h = 0.0);

/// |dS/dt + H(t, x, grad_x S)| for a single-time S(t, x) and H(t, x, p).
double hj_residual_single(const std::string& s, const std::string& h, std::size_t dim, double t,
                          const std::vector<std::vector<double>>& positions, double step = 0.0);

/// (|R_1|, ..., |R_n|) with R_j = dS/dt_j + H_j(t, x, grad_x S).
std::vector<double> hj_residual_multi(const HJFunction& s, const HamiltonianFunctionSet& hs,
                                      const ConfigurationPoint& point);

/// Signed P_jk = dH_k/dt_j - dH_j/dt_k - {H_j, H_k} at a layout vector.
double poisson_defect(const HamiltonianFunctionSet& hs, std::span<const double> z, std::size_t j,
                      std::size_t k, double h = 0.0);

/// |P_jk| for every j < k and the maximum.
DefectReport hj_consistency_defect(const HamiltonianFunctionSet& hs, const PhasePoint& point,
                                   double h = 0.0);

/// Euclidean norm of grad_{x,p} P_jk: the leading-order rate at which the two
/// orderings of the j/k flows separate, per unit rectangle area.
double defect_flow_norm(const HamiltonianFunctionSet& hs, const PhasePoint& point, std::size_t j,
                        std::size_t k, double h = kDefaultSecondOrderStep);

/// |sum_j H_j - H| at equal times t_j = t; requires the single-time H.
double equal_time_sum_gap(const HamiltonianFunctionSet& hs, const PhasePoint& point);

struct VelocityDefect {
    double value = 0.0;
    double smoothness = 0.0;  // largest mixed-partial asymmetry observed
    bool smoothness_warning = false;
};

/// sup over j != k and components of (d/dt_j + grad_{x_j} S / m_j . grad_{x_j}) grad_{x_k} S.
VelocityDefect hj_velocity_consistency_defect(const HJFunction& s, const ConfigurationPoint& point,
                                              double h = kDefaultSecondOrderStep);

/// Largest |d_a d_b S - d_b d_a S| over all pairs of time/position slots,
/// using stencils of different widths for the two orders.
double mixed_partial_asymmetry(const HJFunction& s, const ConfigurationPoint& point,
                               double h = kDefaultSecondOrderStep);

/// Flat foliation with leaves t = s + u . x.
struct Foliation {
    std::vector<double> u;
    std::string id;

    double time_on_leaf(double s, std::span<const double> x) const;
};

/// Integrates dx_j/ds = V_j / (1 - u . V_j), V_j = grad_{x_j} S / m_j at the
/// on-leaf configuration t_j = s + u . x_j, by RK4 in s.
NPath hj_trajectories_foliation(const HJFunction& s, const Foliation& fol,
                                const std::vector<std::vector<double>>& init, double s0, double span,
                                double ds);

struct DivergenceReport {
    std::vector<std::string> ids;
    std::vector<std::vector<double>> distance;  // symmetric, zero diagonal
    bool foliation_independent = false;
    double threshold = 1e-6;
    std::size_t grid_points = 0;
};

/// World lines compared as point sets: sup over particles and a common time
/// grid of |x_j^A(t) - x_j^B(t)|.
double npath_distance(const NPath& a, const NPath& b, std::size_t grid_points = 201);

DivergenceReport foliation_compare(const HJFunction& s, const std::vector<Foliation>& foliations,
                                   const std::vector<std::vector<double>>& init, double s0,
                                   double span, double ds, std::size_t grid_points = 201,
                                   double threshold = 1e-6);

}  // namespace multitime::hj
