#include "mor/galerkin.hpp"

#include "mor/systems.hpp"

#include <doctest.h>

#include <Eigen/QR>

#include <cmath>
#include <random>
#include <stdexcept>

using namespace mor;

namespace {

// Three-state model with a quadratic coupling so the projection is exercised
// on genuinely nonlinear terms.
NonlinearSystem cubic_system() {
    Matrix A(3, 3);
    A << -1.0, 0.2, 0.0, 0.0, -2.0, 0.1, 0.3, 0.0, -1.5;
    NonlinearSystem sys(
        3, 1, 2,
        [A](const Vector& x, const Vector& u) -> Vector {
            Vector f = A * x;
            f(0) += u(0);
            f(1) += x(0) * x(0);
            return f;
        },
        [A](const Vector& x, const Vector&) -> Matrix {
            Matrix J = A;
            J(1, 0) += 2.0 * x(0);
            return J;
        },
        [](const Vector& x) -> Vector { return x.head(2); });
    return sys;
}

Matrix random_orthonormal(Index rows, Index cols, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    Matrix G(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) G(i, j) = dist(rng);
    return Matrix(Eigen::HouseholderQR<Matrix>(G).householderQ()).leftCols(cols);
}

} // namespace

TEST_CASE("reduce_nonlinear validation") {
    const NonlinearSystem sys = cubic_system();

    SUBCASE("non-orthonormal bases are rejected") {
        CHECK_THROWS_AS(reduce_nonlinear(sys, 2.0 * Matrix::Identity(3, 2)),
                        std::invalid_argument);
    }
    SUBCASE("dimension mismatches are rejected") {
        CHECK_THROWS_AS(reduce_nonlinear(sys, Matrix::Identity(4, 2)),
                        std::invalid_argument);
        CHECK_THROWS_AS(reduce_nonlinear(sys, Matrix::Zero(3, 0)),
                        std::invalid_argument);
    }
    SUBCASE("missing callables are rejected") {
        NonlinearSystem broken = sys;
        broken.jac_f = nullptr;
        CHECK_THROWS_AS(reduce_nonlinear(broken, Matrix::Identity(3, 2)),
                        std::runtime_error);
    }
    SUBCASE("descriptor sources must be folded first") {
        NonlinearSystem descriptor = sys;
        descriptor.E = 2.0 * Matrix::Identity(3, 3);
        CHECK_THROWS_AS(reduce_nonlinear(descriptor, Matrix::Identity(3, 2)),
                        std::runtime_error);
    }
}

TEST_CASE("identity basis reproduces the full model") {
    const NonlinearSystem sys = cubic_system();
    const ReducedNonlinearSystem red = reduce_nonlinear(sys, Matrix::Identity(3, 3));
    CHECK(red.full_order() == 3);
    CHECK(red.reduced_order() == 3);

    Vector x(3), u(1);
    x << 0.3, -0.7, 1.1;
    u << 0.4;
    CHECK((red.rom.f(x, u) - sys.f(x, u)).norm() < 1e-15);
    CHECK((red.rom.jac_f(x, u) - sys.jac_f(x, u)).norm() < 1e-15);
    CHECK((red.rom.h(x) - sys.h(x)).norm() < 1e-15);
}

TEST_CASE("projected maps follow their defining formulas") {
    const NonlinearSystem sys = cubic_system();
    const Matrix V = random_orthonormal(3, 2, 7);
    const ReducedNonlinearSystem red = reduce_nonlinear(sys, V);

    Vector xr(2), u(1);
    xr << 0.6, -0.2;
    u << 1.0;

    SUBCASE("reduced dynamics are V' f(V x_r, u)") {
        const Vector expect = V.transpose() * sys.f(V * xr, u);
        CHECK((red.rom.f(xr, u) - expect).norm() < 1e-14);
    }

    SUBCASE("residual of the projected dynamics is Galerkin orthogonal to V") {
        // f(V x_r) minus its lifted reduced image has no component in span V.
        const Vector residual = sys.f(V * xr, u) - V * red.rom.f(xr, u);
        CHECK((V.transpose() * residual).lpNorm<Eigen::Infinity>() < 1e-14);
    }

    SUBCASE("reduced Jacobian agrees with finite differences of the reduced map") {
        const Matrix J = red.rom.jac_f(xr, u);
        const Matrix J_fd = fd_jacobian(red.rom.f, xr, u);
        CHECK((J - J_fd).norm() / std::max(J.norm(), 1.0) < 1e-7);
    }

    SUBCASE("output map is evaluated on the lifted state") {
        CHECK((red.rom.h(xr) - sys.h(V * xr)).norm() < 1e-15);
    }

    SUBCASE("an attached linearization is projected along") {
        NonlinearSystem with_lin = cubic_system();
        Matrix A(3, 3);
        A << -1.0, 0.2, 0.0, 0.0, -2.0, 0.1, 0.3, 0.0, -1.5;
        with_lin.linearization =
            LinearSystem(A, Matrix::Ones(3, 1), Matrix::Ones(2, 3));
        const ReducedNonlinearSystem red2 = reduce_nonlinear(with_lin, V);
        REQUIRE(red2.rom.linearization.has_value());
        CHECK((red2.rom.linearization->A - V.transpose() * A * V).norm() < 1e-14);
    }
}

TEST_CASE("lift and project are mutually consistent") {
    const Matrix V = random_orthonormal(5, 2, 9);
    Vector xr(2);
    xr << 1.25, -0.5;

    const Vector x = lift(V, xr);
    CHECK((x - V * xr).norm() == 0.0);
    // Orthonormal columns make project a left inverse of lift.
    CHECK((project(V, x) - xr).norm() < 1e-14);

    CHECK_THROWS_AS(lift(V, Vector::Zero(3)), std::invalid_argument);
    CHECK_THROWS_AS(project(V, Vector::Zero(4)), std::invalid_argument);
}

TEST_CASE("the orthogonal projector onto the basis span is idempotent") {
    const Matrix V = random_orthonormal(9, 4, 13);
    const Matrix P = V * V.transpose();
    CHECK((P * P - P).norm() < 1e-12);
    // Acting on the span it is the identity, so lifting then projecting back
    // through P changes nothing.
    Vector xr(4);
    xr << 0.3, -1.1, 0.7, 2.0;
    const Vector x = lift(V, xr);
    CHECK((P * x - x).norm() < 1e-12);
}
