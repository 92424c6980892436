#include "multitime/linops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "multitime/errors.hpp"

namespace multitime::linalg {

namespace {

void require_same_dim(const ComplexMatrix& a, const ComplexMatrix& b, const char* what) {
    if (a.dim() != b.dim()) {
        throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a.dim()) +
                             " vs " + std::to_string(b.dim()) + ")");
    }
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<complex>> rows)
    : dim_(rows.size()), data_() {
    data_.reserve(dim_ * dim_);
    for (const auto& row : rows) {
        if (row.size() != dim_) throw DimensionError("ComplexMatrix: rows must form a square matrix");
        data_.insert(data_.end(), row.begin(), row.end());
    }
}

ComplexMatrix ComplexMatrix::identity(std::size_t dim) {
    ComplexMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
    require_same_dim(*this, other, "matrix addition");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
    require_same_dim(*this, other, "matrix subtraction");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(complex s) {
    for (auto& v : data_) v *= s;
    return *this;
}

ComplexMatrix ComplexMatrix::adjoint() const {
    ComplexMatrix out(dim_);
    for (std::size_t r = 0; r < dim_; ++r) {
        for (std::size_t c = 0; c < dim_; ++c) out(c, r) = std::conj((*this)(r, c));
    }
    return out;
}

double ComplexMatrix::norm_inf() const {
    double best = 0.0;
    for (std::size_t r = 0; r < dim_; ++r) {
        double row = 0.0;
        for (std::size_t c = 0; c < dim_; ++c) row += std::abs((*this)(r, c));
        best = std::max(best, row);
    }
    return best;
}

double ComplexMatrix::max_abs() const {
    double best = 0.0;
    for (const auto& v : data_) best = std::max(best, std::abs(v));
    return best;
}

bool ComplexMatrix::is_hermitian(double tol) const {
    return (*this - adjoint()).norm_inf() < tol;
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
ComplexMatrix operator*(complex s, ComplexMatrix a) { return a *= s; }

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_same_dim(a, b, "matrix product");
    const std::size_t n = a.dim();
    ComplexMatrix out(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            const complex aik = a(i, k);
            if (aik == complex{}) continue;
            for (std::size_t j = 0; j < n; ++j) out(i, j) += aik * b(k, j);
        }
    }
    return out;
}

StateVector StateVector::basis(std::size_t dim, std::size_t index) {
    if (index >= dim) throw DimensionError("StateVector::basis: index out of range");
    StateVector v(dim);
    v[index] = 1.0;
    return v;
}

double StateVector::norm() const {
    double sum = 0.0;
    for (const auto& v : data_) sum += std::norm(v);
    return std::sqrt(sum);
}

StateVector StateVector::normalized() const {
    const double n = norm();
    if (n == 0.0) throw NumericalError("cannot normalize the zero vector");
    StateVector out = *this;
    out *= 1.0 / n;
    return out;
}

StateVector& StateVector::operator+=(const StateVector& other) {
    if (dim() != other.dim()) throw DimensionError("vector addition: dimension mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

StateVector& StateVector::operator-=(const StateVector& other) {
    if (dim() != other.dim()) throw DimensionError("vector subtraction: dimension mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

StateVector& StateVector::operator*=(complex s) {
    for (auto& v : data_) v *= s;
    return *this;
}

StateVector operator+(StateVector a, const StateVector& b) { return a += b; }
StateVector operator-(StateVector a, const StateVector& b) { return a -= b; }
StateVector operator*(complex s, StateVector v) { return v *= s; }

StateVector operator*(const ComplexMatrix& a, const StateVector& v) {
    if (a.dim() != v.dim()) throw DimensionError("matrix-vector product: dimension mismatch");
    const std::size_t n = a.dim();
    StateVector out(n);
    for (std::size_t i = 0; i < n; ++i) {
        complex sum{};
        for (std::size_t j = 0; j < n; ++j) sum += a(i, j) * v[j];
        out[i] = sum;
    }
    return out;
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_same_dim(a, b, "commutator");
    return a * b - b * a;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    const std::size_t na = a.dim();
    const std::size_t nb = b.dim();
    ComplexMatrix out(na * nb);
    for (std::size_t i = 0; i < na; ++i) {
        for (std::size_t j = 0; j < na; ++j) {
            const complex aij = a(i, j);
            for (std::size_t k = 0; k < nb; ++k) {
                for (std::size_t l = 0; l < nb; ++l) out(i * nb + k, j * nb + l) = aij * b(k, l);
            }
        }
    }
    return out;
}

ComplexMatrix kron(std::span<const ComplexMatrix> factors) {
    if (factors.empty()) return ComplexMatrix::identity(1);
    ComplexMatrix out = factors.front();
    for (std::size_t i = 1; i < factors.size(); ++i) out = kron(out, factors[i]);
    return out;
}

ComplexMatrix matrix_exponential(const ComplexMatrix& a) {
    const std::size_t n = a.dim();
    if (n > kMaxExponentialDim) {
        throw DimensionError("matrix_exponential: dimension " + std::to_string(n) +
                             " exceeds the dense limit " + std::to_string(kMaxExponentialDim));
    }
    const double norm = a.norm_inf();
    if (!std::isfinite(norm)) throw NumericalError("matrix_exponential: non-finite input");

    // Scale so that ||A / 2^s|| <= 1/2; the Taylor tail is then below 1e-17 after ~18 terms.
    int squarings = 0;
    if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    if (squarings > 1000) throw NumericalError("matrix_exponential: norm too large to exponentiate");
    ComplexMatrix scaled = a;
    scaled *= std::ldexp(1.0, -squarings);

    ComplexMatrix result = ComplexMatrix::identity(n);
    ComplexMatrix term = ComplexMatrix::identity(n);
    for (int k = 1; k <= 40; ++k) {
        term = term * scaled;
        term *= 1.0 / k;
        result += term;
        if (term.norm_inf() <= 1e-18 * result.norm_inf()) break;
    }
    for (int s = 0; s < squarings; ++s) result = result * result;

    for (const auto& v : result.data()) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            throw NumericalError("matrix_exponential: overflow (input norm " + std::to_string(norm) + ")");
        }
    }
    return result;
}

ComplexMatrix propagator(const ComplexMatrix& h, double t) {
    return matrix_exponential(complex(0.0, -t) * h);
}

namespace pauli {
ComplexMatrix I() { return ComplexMatrix::identity(2); }
ComplexMatrix X() { return {{0.0, 1.0}, {1.0, 0.0}}; }
ComplexMatrix Y() { return {{0.0, complex(0.0, -1.0)}, {complex(0.0, 1.0), 0.0}}; }
ComplexMatrix Z() { return {{1.0, 0.0}, {0.0, -1.0}}; }
}  // namespace pauli

}  // namespace multitime::linalg
