#include <doctest.h>

#include <random>

#include "multitime/errors.hpp"
#include "multitime/linops.hpp"
#include "oracles.hpp"

using namespace multitime;
using namespace multitime::linalg;

TEST_CASE("paulis and kron match the oracle") {
    for (const char* s : {"XZ", "YI", "ZZY", "IXI"}) {
        std::vector<ComplexMatrix> factors;
        for (const char* c = s; *c; ++c) {
            switch (*c) {
                case 'X': factors.push_back(pauli::X()); break;
                case 'Y': factors.push_back(pauli::Y()); break;
                case 'Z': factors.push_back(pauli::Z()); break;
                default: factors.push_back(pauli::I()); break;
            }
        }
        CHECK((oracle::to_eigen(kron(factors)) - oracle::pauli_string(s)).norm() == 0.0);
    }
}

TEST_CASE("basic algebra") {
    const auto x = pauli::X();
    const auto y = pauli::Y();
    const auto z = pauli::Z();
    CHECK(x * x == ComplexMatrix::identity(2));
    CHECK(commutator(x, y) == complex(0, 2) * z);
    CHECK(x.is_hermitian());
    CHECK_FALSE((complex(0, 1) * x).is_hermitian());
    CHECK(ComplexMatrix({{1, 2}, {3, 4}}).norm_inf() == 7.0);
    CHECK(ComplexMatrix({{1, -5}, {3, 4}}).max_abs() == 5.0);
    const StateVector v{1.0, complex(0, 1)};
    CHECK(v.norm() == doctest::Approx(std::sqrt(2.0)));
    CHECK(v.normalized().norm() == doctest::Approx(1.0));
    CHECK(StateVector::basis(4, 2)[2] == complex(1.0));
    CHECK((x * StateVector::basis(2, 0))[1] == complex(1.0));
}

TEST_CASE("matrix products match the oracle") {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 20; ++i) {
        const auto a = oracle::random_matrix(rng, 5);
        const auto b = oracle::random_matrix(rng, 5);
        const auto ours = oracle::from_eigen(a) * oracle::from_eigen(b);
        CHECK((oracle::to_eigen(ours) - a * b).norm() < 1e-13);
    }
}

TEST_CASE("commutator antisymmetry is exact") {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 50; ++i) {
        const auto a = oracle::from_eigen(oracle::random_matrix(rng, 4));
        const auto b = oracle::from_eigen(oracle::random_matrix(rng, 4));
        CHECK((commutator(a, b) + commutator(b, a)).max_abs() == 0.0);
    }
}

TEST_CASE("Jacobi identity") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
        const auto a = oracle::from_eigen(oracle::random_matrix(rng, 4));
        const auto b = oracle::from_eigen(oracle::random_matrix(rng, 4));
        const auto c = oracle::from_eigen(oracle::random_matrix(rng, 4));
        const auto j = commutator(a, commutator(b, c)) + commutator(b, commutator(c, a)) +
                       commutator(c, commutator(a, b));
        CHECK(j.norm_inf() < 1e-12);
    }
}

TEST_CASE("propagator matches eigendecomposition and is unitary") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> ts(-10.0, 10.0);
    std::uniform_real_distribution<double> scale(0.1, 10.0);
    for (int i = 0; i < 100; ++i) {
        const auto dim = static_cast<Eigen::Index>(2 + i % 7);
        const auto h = oracle::random_hermitian(rng, dim, scale(rng));
        const double t = ts(rng);
        const auto u = propagator(oracle::from_eigen(h), t);
        const auto uu = u.adjoint() * u - ComplexMatrix::identity(u.dim());
        CHECK(uu.norm_inf() < 1e-11);
        CHECK(oracle::norm_inf(oracle::to_eigen(u) - oracle::propagator(h, t)) < 1e-10);
    }
}

TEST_CASE("matrix exponential of nilpotent and diagonal matrices") {
    const ComplexMatrix n{{0, 1}, {0, 0}};
    CHECK(matrix_exponential(n) == ComplexMatrix({{1, 1}, {0, 1}}));
    const ComplexMatrix d{{1, 0}, {0, -2}};
    const auto e = matrix_exponential(d);
    CHECK(std::abs(e(0, 0) - std::exp(1.0)) < 1e-14);
    CHECK(std::abs(e(1, 1) - std::exp(-2.0)) < 1e-15);
    CHECK(matrix_exponential(ComplexMatrix::zeros(3)) == ComplexMatrix::identity(3));
}

TEST_CASE("matrix exponential limits") {
    CHECK_THROWS_AS(matrix_exponential(ComplexMatrix(kMaxExponentialDim + 1)), DimensionError);
    CHECK_THROWS_AS(matrix_exponential(ComplexMatrix{{1e6, 0}, {0, 0}}), NumericalError);
}

TEST_CASE("shape mismatches") {
    CHECK_THROWS_AS(ComplexMatrix(2) * ComplexMatrix(3), DimensionError);
    CHECK_THROWS_AS(ComplexMatrix(2) + ComplexMatrix(3), DimensionError);
    CHECK_THROWS_AS(ComplexMatrix(2) * StateVector(3), DimensionError);
}
