#include "mor/systems.hpp"

#include <Eigen/LU>

#include <cmath>
#include <memory>
#include <random>
#include <stdexcept>

namespace mor {

namespace {

void check_linear_shapes(const Matrix& E, const Matrix& A, const Matrix& B, const Matrix& C) {
    const Index n = A.rows();
    if (A.cols() != n) throw std::invalid_argument("LinearSystem: A must be square");
    if (E.rows() != n || E.cols() != n)
        throw std::invalid_argument("LinearSystem: E must match A");
    if (B.rows() != n) throw std::invalid_argument("LinearSystem: B row count must be n");
    if (C.cols() != n) throw std::invalid_argument("LinearSystem: C column count must be n");
    if (B.cols() < 1 || C.rows() < 1)
        throw std::invalid_argument("LinearSystem: need at least one input and output");
    Eigen::FullPivLU<Matrix> lu(E);
    if (!lu.isInvertible())
        throw std::invalid_argument("LinearSystem: E is singular");
}

} // namespace

LinearSystem::LinearSystem(Matrix E_, Matrix A_, Matrix B_, Matrix C_)
    : E(std::move(E_)), A(std::move(A_)), B(std::move(B_)), C(std::move(C_)) {
    check_linear_shapes(E, A, B, C);
    n = A.rows();
    m = B.cols();
    p = C.rows();
}

// Member initializers run in declaration order (E before A), so A_ is still
// intact when the identity mass matrix reads its size.  Delegating to the
// four-argument constructor instead would leave the evaluation order of
// Identity(A_.rows(), ...) versus std::move(A_) unspecified.
LinearSystem::LinearSystem(Matrix A_, Matrix B_, Matrix C_)
    : E(Matrix::Identity(A_.rows(), A_.rows())), A(std::move(A_)),
      B(std::move(B_)), C(std::move(C_)) {
    check_linear_shapes(E, A, B, C);
    n = A.rows();
    m = B.cols();
    p = C.rows();
}

NonlinearSystem::NonlinearSystem(Index n_, Index m_, Index p_,
                                 std::function<Vector(const Vector&, const Vector&)> f_,
                                 std::function<Matrix(const Vector&, const Vector&)> jac_f_,
                                 std::function<Vector(const Vector&)> h_)
    : n(n_), m(m_), p(p_), f(std::move(f_)), jac_f(std::move(jac_f_)), h(std::move(h_)) {
    if (n < 1 || m < 1 || p < 1)
        throw std::invalid_argument("NonlinearSystem: dimensions must be positive");
    if (!f) throw std::invalid_argument("NonlinearSystem: f is required");
}

NonlinearSystem from_linear(const LinearSystem& sys) {
    // Pre-factor E once; the wrapped callables then only do solves.
    auto lu = std::make_shared<Eigen::PartialPivLU<Matrix>>(sys.E);
    const Matrix A = sys.A;
    const Matrix B = sys.B;
    const Matrix C = sys.C;
    NonlinearSystem nl(
        sys.n, sys.m, sys.p,
        [lu, A, B](const Vector& x, const Vector& u) -> Vector {
            return lu->solve(A * x + B * u);
        },
        [lu, A](const Vector&, const Vector&) -> Matrix { return lu->solve(A); },
        [C](const Vector& x) -> Vector { return C * x; });
    nl.linearization = sys;
    return nl;
}

Matrix fd_jacobian(const std::function<Vector(const Vector&, const Vector&)>& f,
                   const Vector& x, const Vector& u) {
    const Index n = x.size();
    const Vector f0 = f(x, u);
    Matrix J(f0.size(), n);
    for (Index j = 0; j < n; ++j) {
        const double step = 1e-6 * (1.0 + std::abs(x(j)));
        Vector xp = x, xm = x;
        xp(j) += step;
        xm(j) -= step;
        J.col(j) = (f(xp, u) - f(xm, u)) / (2.0 * step);
    }
    return J;
}

SystemValidationReport validate_system(const NonlinearSystem& sys, int probes, unsigned seed) {
    if (!sys.f || !sys.jac_f || !sys.h)
        throw std::invalid_argument("validate_system: f, jac_f and h must all be set");

    SystemValidationReport report;
    const Vector zero_x = Vector::Zero(sys.n);
    const Vector zero_u = Vector::Zero(sys.m);

    const Vector f0 = sys.f(zero_x, zero_u);
    if (f0.size() != sys.n)
        throw std::invalid_argument("validate_system: f output length does not match n");
    report.equilibrium_residual = f0.lpNorm<Eigen::Infinity>();
    report.equilibrium_ok = report.equilibrium_residual <= 1e-12;

    const Vector h0 = sys.h(zero_x);
    if (h0.size() != sys.p)
        throw std::invalid_argument("validate_system: h output length does not match p");
    report.output_residual = h0.lpNorm<Eigen::Infinity>();
    report.output_ok = report.output_residual <= 1e-12;

    // Analytic vs central-difference Jacobian at random states and inputs.
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < probes; ++trial) {
        Vector x(sys.n), u(sys.m);
        for (Index i = 0; i < sys.n; ++i) x(i) = dist(rng);
        for (Index i = 0; i < sys.m; ++i) u(i) = dist(rng);
        const Matrix J = sys.jac_f(x, u);
        if (J.rows() != sys.n || J.cols() != sys.n)
            throw std::invalid_argument("validate_system: jac_f shape must be n x n");
        const Matrix J_fd = fd_jacobian(sys.f, x, u);
        const double scale = std::max(J.norm(), 1.0);
        worst = std::max(worst, (J - J_fd).norm() / scale);
    }
    report.max_jacobian_rel_error = worst;
    report.jacobian_ok = worst <= 1e-5;
    return report;
}

} // namespace mor
