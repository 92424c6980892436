#pragma once

// Dense complex linear algebra for the quantum sector. Dimensions are small
// (a few qubits), so everything is row-major dense storage with value semantics.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace multitime::linalg {

using complex = std::complex<double>;

class ComplexMatrix {
public:
    ComplexMatrix() = default;
    explicit ComplexMatrix(std::size_t dim) : dim_(dim), data_(dim * dim) {}
    ComplexMatrix(std::initializer_list<std::initializer_list<complex>> rows);

    static ComplexMatrix identity(std::size_t dim);
    static ComplexMatrix zeros(std::size_t dim) { return ComplexMatrix(dim); }

    std::size_t dim() const noexcept { return dim_; }

    complex& operator()(std::size_t r, std::size_t c) { return data_[r * dim_ + c]; }
    const complex& operator()(std::size_t r, std::size_t c) const { return data_[r * dim_ + c]; }

    std::span<const complex> data() const noexcept { return data_; }
    std::span<complex> data() noexcept { return data_; }

    ComplexMatrix& operator+=(const ComplexMatrix& other);
    ComplexMatrix& operator-=(const ComplexMatrix& other);
    ComplexMatrix& operator*=(complex s);

    ComplexMatrix adjoint() const;

    /// Induced infinity norm: maximum absolute row sum.
    double norm_inf() const;
    /// Largest entry modulus.
    double max_abs() const;

    bool is_hermitian(double tol = 1e-10) const;

    friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

private:
    std::size_t dim_ = 0;
    std::vector<complex> data_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator*(complex s, ComplexMatrix a);

class StateVector {
public:
    StateVector() = default;
    explicit StateVector(std::size_t dim) : data_(dim) {}
    StateVector(std::initializer_list<complex> values) : data_(values) {}
    explicit StateVector(std::vector<complex> values) : data_(std::move(values)) {}

    /// Computational basis vector |index>.
    static StateVector basis(std::size_t dim, std::size_t index);

    std::size_t dim() const noexcept { return data_.size(); }
    complex& operator[](std::size_t i) { return data_[i]; }
    const complex& operator[](std::size_t i) const { return data_[i]; }
    std::span<const complex> data() const noexcept { return data_; }

    double norm() const;
    StateVector normalized() const;

    StateVector& operator+=(const StateVector& other);
    StateVector& operator-=(const StateVector& other);
    StateVector& operator*=(complex s);

    friend bool operator==(const StateVector&, const StateVector&) = default;

private:
    std::vector<complex> data_;
};

StateVector operator+(StateVector a, const StateVector& b);
StateVector operator-(StateVector a, const StateVector& b);
StateVector operator*(complex s, StateVector v);
StateVector operator*(const ComplexMatrix& a, const StateVector& v);

/// AB - BA
ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);

/// Kronecker product; the left factor is the slowest-varying index (particle 1 leftmost).
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix kron(std::span<const ComplexMatrix> factors);

inline constexpr std::size_t kMaxExponentialDim = 1024;

/// exp(A) by scaling and squaring with a truncated Taylor series on A / 2^s.
/// Throws DimensionError above kMaxExponentialDim and NumericalError on overflow.
ComplexMatrix matrix_exponential(const ComplexMatrix& a);

/// exp(-i H t) for Hermitian H.
ComplexMatrix propagator(const ComplexMatrix& h, double t);

namespace pauli {
ComplexMatrix I();
ComplexMatrix X();
ComplexMatrix Y();
ComplexMatrix Z();
}  // namespace pauli

}  // namespace multitime::linalg
