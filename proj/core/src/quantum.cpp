#include "multitime/quantum.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "multitime/errors.hpp"
#include "multitime/numdiff.hpp"

namespace multitime::quantum {

using linalg::complex;

namespace {

std::size_t int_pow(std::size_t base, std::size_t exp) {
    std::size_t r = 1;
    for (std::size_t i = 0; i < exp; ++i) r *= base;
    return r;
}

ComplexMatrix derivative_along(const PartialHamiltonianSet& sys, std::size_t target,
                               const TimeTuple& t, std::size_t axis, double h) {
    check_step(t[axis], h);
    TimeTuple plus = t;
    TimeTuple minus = t;
    plus[axis] += h;
    minus[axis] -= h;
    ComplexMatrix d = sys.partial(target, plus) - sys.partial(target, minus);
    d *= 1.0 / (2.0 * h);
    return d;
}

}  // namespace

ComplexMatrix embed(const ComplexMatrix& local, std::size_t j, std::size_t n) {
    if (j >= n) throw DimensionError("embed: particle index out of range");
    std::vector<ComplexMatrix> factors(n, ComplexMatrix::identity(local.dim()));
    factors[j] = local;
    return linalg::kron(factors);
}

ComplexMatrix pauli_string(const std::string& letters) {
    if (letters.empty()) throw DimensionError("pauli_string: empty string");
    std::vector<ComplexMatrix> factors;
    factors.reserve(letters.size());
    for (char c : letters) {
        switch (c) {
            case 'I': factors.push_back(linalg::pauli::I()); break;
            case 'X': factors.push_back(linalg::pauli::X()); break;
            case 'Y': factors.push_back(linalg::pauli::Y()); break;
            case 'Z': factors.push_back(linalg::pauli::Z()); break;
            default:
                throw DimensionError("pauli_string: unknown factor '" + std::string(1, c) + "'");
        }
    }
    return linalg::kron(factors);
}

PartialHamiltonianSet::PartialHamiltonianSet(std::size_t particles, std::size_t local_dim,
                                             std::vector<Generator> generators,
                                             std::vector<ComplexMatrix> frame)
    : n_(particles),
      k_(local_dim),
      dim_(int_pow(local_dim, particles)),
      generators_(std::move(generators)),
      frame_(std::move(frame)) {
    if (n_ == 0 || k_ == 0) throw DimensionError("PartialHamiltonianSet: n and k must be positive");
    if (dim_ > linalg::kMaxExponentialDim) {
        throw DimensionError("PartialHamiltonianSet: state space dimension " + std::to_string(dim_) +
                             " exceeds " + std::to_string(linalg::kMaxExponentialDim));
    }
    if (generators_.size() != n_) {
        throw DimensionError("PartialHamiltonianSet: expected " + std::to_string(n_) +
                             " partial Hamiltonians, got " + std::to_string(generators_.size()));
    }
    bool needs_frame = false;
    auto check_matrix = [&](const ComplexMatrix& m, const std::string& what) {
        if (m.dim() != dim_) {
            throw DimensionError(what + ": dimension " + std::to_string(m.dim()) + ", expected " +
                                 std::to_string(dim_));
        }
        if (!m.is_hermitian(kHermiticityTolerance)) throw DimensionError(what + " is not Hermitian");
    };
    for (std::size_t j = 0; j < n_; ++j) {
        const std::string what = "H" + std::to_string(j + 1);
        std::visit(
            [&](const auto& g) {
                using T = std::decay_t<decltype(g)>;
                if constexpr (std::is_same_v<T, ConstantGenerator>) {
                    check_matrix(g.matrix, what);
                } else if constexpr (std::is_same_v<T, TermGenerator>) {
                    for (const auto& term : g.terms) check_matrix(term.op, what + " term operator");
                } else {
                    check_matrix(g.kernel, what + " kernel");
                    needs_frame = true;
                }
            },
            generators_[j]);
    }
    if (!frame_.empty()) {
        if (frame_.size() != n_) throw DimensionError("interaction frame needs one generator per time");
        for (std::size_t l = 0; l < n_; ++l) check_matrix(frame_[l], "frame generator A" + std::to_string(l + 1));
        for (std::size_t a = 0; a < n_; ++a) {
            for (std::size_t b = a + 1; b < n_; ++b) {
                if (linalg::commutator(frame_[a], frame_[b]).norm_inf() > kHermiticityTolerance) {
                    throw DimensionError("interaction frame generators must commute");
                }
            }
        }
    } else if (needs_frame) {
        throw DimensionError("interaction-picture generators require frame generators");
    }
}

PartialHamiltonianSet PartialHamiltonianSet::constant(std::size_t local_dim,
                                                      std::vector<ComplexMatrix> hs) {
    const std::size_t n = hs.size();
    std::vector<Generator> gens;
    gens.reserve(n);
    for (auto& h : hs) gens.emplace_back(ConstantGenerator{std::move(h)});
    return PartialHamiltonianSet(n, local_dim, std::move(gens));
}

PartialHamiltonianSet PartialHamiltonianSet::interaction_picture(std::size_t local_dim,
                                                                 std::vector<ComplexMatrix> frame,
                                                                 std::vector<ComplexMatrix> kernels) {
    const std::size_t n = kernels.size();
    std::vector<Generator> gens;
    gens.reserve(n);
    for (auto& k : kernels) gens.emplace_back(InteractionGenerator{std::move(k)});
    return PartialHamiltonianSet(n, local_dim, std::move(gens), std::move(frame));
}

void PartialHamiltonianSet::check_times(const TimeTuple& t) const {
    if (t.size() != n_) {
        throw DimensionError("time tuple has " + std::to_string(t.size()) + " entries, expected " +
                             std::to_string(n_));
    }
}

ComplexMatrix PartialHamiltonianSet::frame_unitary(const TimeTuple& t) const {
    check_times(t);
    if (frame_.empty()) return ComplexMatrix::identity(dim_);
    ComplexMatrix generator(dim_);
    for (std::size_t l = 0; l < n_; ++l) {
        ComplexMatrix scaled = frame_[l];
        scaled *= t[l];
        generator += scaled;
    }
    return linalg::propagator(generator, 1.0);
}

ComplexMatrix PartialHamiltonianSet::partial(std::size_t j, const TimeTuple& t) const {
    check_times(t);
    if (j >= n_) throw DimensionError("partial Hamiltonian index out of range");
    ComplexMatrix h = std::visit(
        [&](const auto& g) -> ComplexMatrix {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, ConstantGenerator>) {
                return g.matrix;
            } else if constexpr (std::is_same_v<T, TermGenerator>) {
                ComplexMatrix sum(dim_);
                for (const auto& term : g.terms) {
                    ComplexMatrix piece = term.op;
                    piece *= term.coefficient(t);
                    sum += piece;
                }
                return sum;
            } else {
                const ComplexMatrix u = frame_unitary(t);
                return u * g.kernel * u.adjoint();
            }
        },
        generators_[j]);
    if (!h.is_hermitian(kHermiticityTolerance)) {
        throw NumericalError("H" + std::to_string(j + 1) + "(t) lost Hermiticity");
    }
    return h;
}

ComplexMatrix total_hamiltonian(const PartialHamiltonianSet& sys, const TimeTuple& t) {
    ComplexMatrix h(sys.dim());
    for (std::size_t j = 0; j < sys.particles(); ++j) h += sys.partial(j, t);
    return h;
}

ComplexMatrix consistency_operator(const PartialHamiltonianSet& sys, const TimeTuple& t,
                                   std::size_t j, std::size_t k, double h) {
    ComplexMatrix c = derivative_along(sys, k, t, j, h) - derivative_along(sys, j, t, k, h);
    ComplexMatrix bracket = linalg::commutator(sys.partial(j, t), sys.partial(k, t));
    bracket *= complex(0.0, 1.0);
    c += bracket;
    return c;
}

DefectReport quantum_consistency_defect(const PartialHamiltonianSet& sys, const TimeTuple& t,
                                        double h) {
    DefectReport report;
    report.step = h;
    for (std::size_t j = 0; j < sys.particles(); ++j) {
        for (std::size_t k = j + 1; k < sys.particles(); ++k) {
            report.add(j, k, consistency_operator(sys, t, j, k, h).norm_inf());
        }
    }
    return report;
}

StaircasePath::StaircasePath(TimeTuple start, std::vector<Segment> segments)
    : start_(std::move(start)), segments_(std::move(segments)) {
    for (const auto& s : segments_) {
        if (s.axis >= start_.size()) throw DimensionError("staircase segment axis out of range");
        if (s.substeps == 0) throw DimensionError("staircase segment needs at least one substep");
    }
}

TimeTuple StaircasePath::endpoint() const {
    TimeTuple end = start_;
    for (const auto& s : segments_) end[s.axis] += s.duration;
    return end;
}

StaircasePath& StaircasePath::then(std::size_t axis, double duration, std::size_t substeps) {
    if (axis >= start_.size()) throw DimensionError("staircase segment axis out of range");
    if (substeps == 0) throw DimensionError("staircase segment needs at least one substep");
    segments_.push_back({axis, duration, substeps});
    return *this;
}

MultiTimeState evolve_staircase(const PartialHamiltonianSet& sys, const MultiTimeState& initial,
                                const StaircasePath& path) {
    if (path.start() != initial.times) {
        throw DimensionError("staircase path does not start at the state's time tuple");
    }
    if (initial.state.dim() != sys.dim()) throw DimensionError("state dimension mismatch");
    MultiTimeState out = initial;
    for (const auto& seg : path.segments()) {
        if (seg.duration == 0.0) continue;
        const double step = seg.duration / static_cast<double>(seg.substeps);
        const double origin = out.times[seg.axis];
        for (std::size_t s = 0; s < seg.substeps; ++s) {
            TimeTuple mid = out.times;
            mid[seg.axis] = origin + (static_cast<double>(s) + 0.5) * step;
            out.state = linalg::propagator(sys.partial(seg.axis, mid), step) * out.state;
            out.times[seg.axis] = origin + static_cast<double>(s + 1) * step;
        }
    }
    return out;
}

double rectangle_holonomy(const PartialHamiltonianSet& sys, const TimeTuple& t, std::size_t j,
                          std::size_t k, double eps, double delta, const StateVector& phi0,
                          std::size_t substeps) {
    if (j == k) throw DimensionError("rectangle_holonomy: axes must differ");
    if (eps < 0.0 || delta < 0.0) throw DimensionError("rectangle_holonomy: sides must be non-negative");
    StaircasePath a(t, {});
    a.then(j, eps, substeps).then(k, delta, substeps);
    StaircasePath b(t, {});
    b.then(k, delta, substeps).then(j, eps, substeps);
    const MultiTimeState start{phi0, t};
    const auto phi_a = evolve_staircase(sys, start, a).state;
    const auto phi_b = evolve_staircase(sys, start, b).state;
    return (phi_a - phi_b).norm();
}

StateVector diagonal_evolution(const PartialHamiltonianSet& sys, const StateVector& psi0,
                               double t_start, double t_end, std::size_t steps) {
    if (steps == 0) throw DimensionError("diagonal_evolution: steps must be >= 1");
    if (psi0.dim() != sys.dim()) throw DimensionError("state dimension mismatch");
    const double dt = (t_end - t_start) / static_cast<double>(steps);
    StateVector psi = psi0;
    if (dt == 0.0) return psi;
    for (std::size_t s = 0; s < steps; ++s) {
        const double mid = t_start + (static_cast<double>(s) + 0.5) * dt;
        const TimeTuple equal(sys.particles(), mid);
        psi = linalg::propagator(total_hamiltonian(sys, equal), dt) * psi;
    }
    return psi;
}

}  // namespace multitime::quantum
