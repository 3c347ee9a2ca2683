#include "mor/systems.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace mor;

namespace {

// Smooth two-state model with analytically known Jacobian, used as the
// reference point for the finite-difference comparisons.
NonlinearSystem smooth_system() {
    return NonlinearSystem(
        2, 1, 1,
        [](const Vector& x, const Vector& u) -> Vector {
            Vector f(2);
            f << -x(0) + std::sin(x(1)) + u(0), -2.0 * x(1) + x(0) * x(0);
            return f;
        },
        [](const Vector& x, const Vector&) -> Matrix {
            Matrix J(2, 2);
            J << -1.0, std::cos(x(1)), 2.0 * x(0), -2.0;
            return J;
        },
        [](const Vector& x) -> Vector { return x.head(1); });
}

} // namespace

TEST_CASE("LinearSystem construction and shape validation") {
    SUBCASE("dimensions are derived from the matrices") {
        const LinearSystem sys(Matrix::Identity(3, 3), -Matrix::Identity(3, 3),
                               Matrix::Ones(3, 2), Matrix::Ones(1, 3));
        CHECK(sys.n == 3);
        CHECK(sys.m == 2);
        CHECK(sys.p == 1);
    }

    SUBCASE("explicit-form constructor fills E with the identity") {
        Matrix A(2, 2);
        A << -1.0, 0.5, 0.0, -2.0;
        const LinearSystem sys(A, Matrix::Ones(2, 1), Matrix::Ones(1, 2));
        CHECK((sys.E - Matrix::Identity(2, 2)).norm() == 0.0);
        CHECK((sys.A - A).norm() == 0.0);
        CHECK(sys.n == 2);
    }

    SUBCASE("shape mismatches are rejected") {
        const Matrix I2 = Matrix::Identity(2, 2);
        CHECK_THROWS_AS(LinearSystem(I2, Matrix::Zero(2, 3), Matrix::Ones(2, 1),
                                     Matrix::Ones(1, 2)),
                        std::invalid_argument);
        CHECK_THROWS_AS(LinearSystem(Matrix::Identity(3, 3), -I2, Matrix::Ones(2, 1),
                                     Matrix::Ones(1, 2)),
                        std::invalid_argument);
        CHECK_THROWS_AS(LinearSystem(I2, -I2, Matrix::Ones(3, 1), Matrix::Ones(1, 2)),
                        std::invalid_argument);
        CHECK_THROWS_AS(LinearSystem(I2, -I2, Matrix::Ones(2, 1), Matrix::Ones(1, 3)),
                        std::invalid_argument);
    }

    SUBCASE("a singular mass matrix is rejected") {
        Matrix E = Matrix::Identity(2, 2);
        E(1, 1) = 0.0;
        CHECK_THROWS_AS(LinearSystem(E, -Matrix::Identity(2, 2), Matrix::Ones(2, 1),
                                     Matrix::Ones(1, 2)),
                        std::invalid_argument);
    }

    SUBCASE("at least one input and one output are required") {
        const Matrix I2 = Matrix::Identity(2, 2);
        CHECK_THROWS_AS(LinearSystem(I2, -I2, Matrix::Zero(2, 0), Matrix::Ones(1, 2)),
                        std::invalid_argument);
    }
}

TEST_CASE("NonlinearSystem constructor validation") {
    CHECK_THROWS_AS(NonlinearSystem(0, 1, 1, nullptr, nullptr, nullptr),
                    std::invalid_argument);
    CHECK_THROWS_AS(NonlinearSystem(
                        2, 1, 1, nullptr,
                        [](const Vector&, const Vector&) { return Matrix(); },
                        [](const Vector& x) { return x; }),
                    std::invalid_argument);
}

TEST_CASE("from_linear wraps the state-space model faithfully") {
    Matrix E(2, 2), A(2, 2), B(2, 1), C(1, 2);
    E << 2.0, 0.0, 0.5, 1.0;
    A << -1.0, 0.3, 0.2, -2.0;
    B << 1.0, -1.0;
    C << 1.0, 1.0;
    const LinearSystem lin(E, A, B, C);
    const NonlinearSystem wrapped = from_linear(lin);

    CHECK(wrapped.n == 2);
    CHECK(wrapped.m == 1);
    CHECK(wrapped.p == 1);
    REQUIRE(wrapped.linearization.has_value());
    CHECK((wrapped.linearization->A - A).norm() == 0.0);

    Vector x(2), u(1);
    x << 0.7, -0.4;
    u << 1.3;
    // The wrapped right-hand side must solve E f = A x + B u.
    const Vector f = wrapped.f(x, u);
    CHECK((E * f - (A * x + B * u)).lpNorm<Eigen::Infinity>() < 1e-13);
    CHECK((wrapped.jac_f(x, u) - E.inverse() * A).norm() < 1e-13);
    CHECK((wrapped.h(x) - C * x).norm() == 0.0);
}

TEST_CASE("fd_jacobian approximates an analytic Jacobian closely") {
    const NonlinearSystem sys = smooth_system();
    Vector x(2), u(1);
    x << 0.4, -1.1;
    u << 0.2;
    const Matrix J_fd = fd_jacobian(sys.f, x, u);
    const Matrix J = sys.jac_f(x, u);
    CHECK((J - J_fd).norm() / J.norm() < 1e-8);
}

TEST_CASE("validate_system reports residuals and Jacobian agreement") {
    SUBCASE("a consistent model passes all checks") {
        const SystemValidationReport report = validate_system(smooth_system());
        CHECK(report.equilibrium_ok);
        CHECK(report.output_ok);
        CHECK(report.jacobian_ok);
        CHECK(report.passed());
        CHECK(report.max_jacobian_rel_error < 1e-8);
    }

    SUBCASE("a wrong Jacobian is flagged without throwing") {
        NonlinearSystem sys = smooth_system();
        sys.jac_f = [](const Vector&, const Vector&) -> Matrix {
            return Matrix::Zero(2, 2);
        };
        const SystemValidationReport report = validate_system(sys);
        CHECK_FALSE(report.jacobian_ok);
        CHECK(report.max_jacobian_rel_error > 1e-2);
        CHECK_FALSE(report.passed());
    }

    SUBCASE("an equilibrium offset is flagged without throwing") {
        NonlinearSystem sys = smooth_system();
        sys.f = [](const Vector& x, const Vector& u) -> Vector {
            Vector f(2);
            f << -x(0) + std::sin(x(1)) + u(0) + 0.25, -2.0 * x(1) + x(0) * x(0);
            return f;
        };
        const SystemValidationReport report = validate_system(sys);
        CHECK_FALSE(report.equilibrium_ok);
        CHECK(report.equilibrium_residual == doctest::Approx(0.25));
    }

    SUBCASE("structural defects throw instead of reporting") {
        NonlinearSystem sys = smooth_system();
        sys.f = [](const Vector& x, const Vector&) -> Vector { return x.head(1); };
        CHECK_THROWS_AS(validate_system(sys), std::invalid_argument);

        NonlinearSystem bad_jac = smooth_system();
        bad_jac.jac_f = [](const Vector&, const Vector&) -> Matrix {
            return Matrix::Zero(1, 2);
        };
        CHECK_THROWS_AS(validate_system(bad_jac), std::invalid_argument);
    }

    SUBCASE("missing callables throw") {
        NonlinearSystem sys = smooth_system();
        sys.h = nullptr;
        CHECK_THROWS_AS(validate_system(sys), std::invalid_argument);
    }
}
