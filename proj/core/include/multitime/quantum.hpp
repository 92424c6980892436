#pragma once

// Multi-time Schroedinger systems  i d(phi)/d(t_j) = H_j(t_1..t_n) phi  on a
// finite-dimensional tensor-product space (local dimension k per particle).

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "multitime/defect.hpp"
#include "multitime/expr.hpp"
#include "multitime/linops.hpp"

namespace multitime::quantum {

using linalg::ComplexMatrix;
using linalg::StateVector;
using TimeTuple = std::vector<double>;

/// `local` acting on particle j (0-based) of an n-particle space, identity elsewhere.
ComplexMatrix embed(const ComplexMatrix& local, std::size_t j, std::size_t n);

/// Tensor product of single-particle Pauli factors, e.g. "ZI" = sigma_z (x) 1.
/// Accepts I, X, Y, Z; the leftmost letter is particle 1.
ComplexMatrix pauli_string(const std::string& letters);

/// One term  c(t_1..t_n) * op  of a partial Hamiltonian.
struct Term {
    expr::CompiledExpression coefficient;  // compiled against t1..tn
    ComplexMatrix op;
};

struct ConstantGenerator {
    ComplexMatrix matrix;
};
struct TermGenerator {
    std::vector<Term> terms;
};
/// H_j(t) = U(t) K_j U(t)^dagger with U(t) = exp(-i sum_l A_l t_l).
struct InteractionGenerator {
    ComplexMatrix kernel;
};

using Generator = std::variant<ConstantGenerator, TermGenerator, InteractionGenerator>;

class PartialHamiltonianSet {
public:
    /// `frame` holds the commuting base generators A_1..A_n of the interaction
    /// picture; it is required iff some generator is an InteractionGenerator.
    PartialHamiltonianSet(std::size_t particles, std::size_t local_dim,
                          std::vector<Generator> generators,
                          std::vector<ComplexMatrix> frame = {});

    static PartialHamiltonianSet constant(std::size_t local_dim, std::vector<ComplexMatrix> hs);
    static PartialHamiltonianSet interaction_picture(std::size_t local_dim,
                                                     std::vector<ComplexMatrix> frame,
                                                     std::vector<ComplexMatrix> kernels);

    std::size_t particles() const noexcept { return n_; }
    std::size_t local_dim() const noexcept { return k_; }
    std::size_t dim() const noexcept { return dim_; }

    /// H_j(t). Throws NumericalError if the result is not Hermitian to 1e-10.
    ComplexMatrix partial(std::size_t j, const TimeTuple& t) const;

    /// Interaction-picture frame U(t), identity when no frame is configured.
    ComplexMatrix frame_unitary(const TimeTuple& t) const;

private:
    void check_times(const TimeTuple& t) const;

    std::size_t n_;
    std::size_t k_;
    std::size_t dim_;
    std::vector<Generator> generators_;
    std::vector<ComplexMatrix> frame_;
};

inline constexpr double kHermiticityTolerance = 1e-10;
inline constexpr double kDefaultTimeStep = 1e-4;

/// H(t) = sum_j H_j(t).
ComplexMatrix total_hamiltonian(const PartialHamiltonianSet& sys, const TimeTuple& t);

/// C_jk = dH_k/dt_j - dH_j/dt_k + i [H_j, H_k], time derivatives by central
/// differences with step h.
ComplexMatrix consistency_operator(const PartialHamiltonianSet& sys, const TimeTuple& t,
                                   std::size_t j, std::size_t k, double h = kDefaultTimeStep);

/// ||C_jk||_inf for every j < k, plus the maximum.
DefectReport quantum_consistency_defect(const PartialHamiltonianSet& sys, const TimeTuple& t,
                                        double h = kDefaultTimeStep);

struct MultiTimeState {
    StateVector state;
    TimeTuple times;
};

/// Axis-aligned move of a single time coordinate, integrated in `substeps` steps.
struct Segment {
    std::size_t axis = 0;
    double duration = 0.0;
    std::size_t substeps = 1;
};

class StaircasePath {
public:
    StaircasePath() = default;
    StaircasePath(TimeTuple start, std::vector<Segment> segments);

    const TimeTuple& start() const noexcept { return start_; }
    const std::vector<Segment>& segments() const noexcept { return segments_; }

    /// start + per-axis sum of segment durations.
    TimeTuple endpoint() const;

    StaircasePath& then(std::size_t axis, double duration, std::size_t substeps = 1);

private:
    TimeTuple start_;
    std::vector<Segment> segments_;
};

/// Per substep of length d on axis j: phi <- exp(-i H_j(t + d/2 e_j) d) phi.
MultiTimeState evolve_staircase(const PartialHamiltonianSet& sys, const MultiTimeState& initial,
                                const StaircasePath& path);

/// || phi_A - phi_B || for the two orderings of an eps x delta rectangle in
/// (t_j, t_k) starting at t.
double rectangle_holonomy(const PartialHamiltonianSet& sys, const TimeTuple& t, std::size_t j,
                          std::size_t k, double eps, double delta, const StateVector& phi0,
                          std::size_t substeps = 1);

/// Single-time evolution i d(psi)/dt = H(t,..,t) psi with midpoint-frozen exponentials.
StateVector diagonal_evolution(const PartialHamiltonianSet& sys, const StateVector& psi0,
                               double t_start, double t_end, std::size_t steps);

}  // namespace multitime::quantum
