#include "mor/fhn.hpp"

#include <cmath>
#include <stdexcept>

namespace mor {

double fhn_cubic(double v) { return v * (v - 0.1) * (1.0 - v); }

// d/dv of v(v - 0.1)(1 - v) = -v^3 + 1.1 v^2 - 0.1 v
double fhn_cubic_deriv(double v) { return -3.0 * v * v + 2.2 * v - 0.1; }

FhnAssembly build_fhn_assembly(const FhnParams& params) {
    if (params.ell < 2) throw std::invalid_argument("build_fhn: need at least two cells");
    if (!(params.length > 0.0) || !(params.epsilon > 0.0))
        throw std::invalid_argument("build_fhn: length and epsilon must be > 0");

    const Index ell = params.ell;
    const Index n = params.n();
    const double dx = params.length / static_cast<double>(ell);
    const double diff = params.epsilon * params.epsilon / (dx * dx);

    FhnAssembly sys;
    sys.E_diag = Vector::Ones(n);
    sys.E_diag.head(ell).setConstant(params.epsilon);

    // Voltage block: diffusion with zero-flux ends (the boundary stimulus
    // enters through B), recovery coupling -w. Recovery block: b v - gamma w.
    sys.A = Matrix::Zero(n, n);
    for (Index i = 0; i < ell; ++i) {
        if (i > 0) sys.A(i, i - 1) = diff;
        if (i + 1 < ell) sys.A(i, i + 1) = diff;
        sys.A(i, i) = (i == 0 || i + 1 == ell) ? -diff : -2.0 * diff;
        sys.A(i, ell + i) = -1.0;
        sys.A(ell + i, i) = params.b;
        sys.A(ell + i, ell + i) = -params.gamma;
    }

    // Inputs: channel 1 is the boundary current (ghost-cell substitution
    // puts eps^2/dx of it into the first cell), channel 2 is the constant
    // source g feeding every equation.
    sys.B = Matrix::Zero(n, 2);
    sys.B(0, 0) = params.epsilon * params.epsilon / dx;
    sys.B.col(1).setConstant(params.g);

    // Outputs tap voltage and recovery at the stimulated boundary cell.
    sys.C = Matrix::Zero(2, n);
    sys.C(0, 0) = 1.0;
    sys.C(1, ell) = 1.0;
    return sys;
}

NonlinearSystem build_fhn(const FhnParams& params) {
    const FhnAssembly assembly = build_fhn_assembly(params);
    const Index ell = params.ell;
    const Index n = params.n();

    // Fold the diagonal mass matrix into the right-hand side once, so the
    // model is in explicit form for integration and reduction alike.
    const Vector Einv = assembly.E_diag.cwiseInverse();
    const Matrix A_impl = Einv.asDiagonal() * assembly.A;
    const Matrix B_impl = Einv.asDiagonal() * assembly.B;
    const Matrix C = assembly.C;

    NonlinearSystem sys(
        n, 2, 2,
        [A_impl, B_impl, Einv, ell](const Vector& x, const Vector& u) -> Vector {
            Vector rhs = A_impl * x + B_impl * u;
            for (Index i = 0; i < ell; ++i)
                rhs(i) += Einv(i) * fhn_cubic(x(i));
            return rhs;
        },
        [A_impl, Einv, ell](const Vector& x, const Vector&) -> Matrix {
            Matrix J = A_impl;
            for (Index i = 0; i < ell; ++i)
                J(i, i) += Einv(i) * fhn_cubic_deriv(x(i));
            return J;
        },
        [C](const Vector& x) -> Vector { return C * x; });

    // Linearization about the origin feeds resolvent initial guesses. The
    // cubic contributes its slope at zero to the voltage diagonal.
    Matrix A_lin = A_impl;
    for (Index i = 0; i < ell; ++i)
        A_lin(i, i) += Einv(i) * fhn_cubic_deriv(0.0);
    sys.linearization = LinearSystem(std::move(A_lin), B_impl, C);
    return sys;
}

Vector fhn_test_input(double t) {
    Vector u(2);
    u(0) = 5.0e4 * t * t * t * std::exp(-15.0 * t);
    u(1) = 1.0;
    return u;
}

SignalGenerator fhn_training_generator() {
    NonlinearGenerator gen;
    gen.s_v = [](double x) { return x + 0.3; };
    gen.r = [](double x) {
        Vector u(2);
        u(0) = x;
        u(1) = 1.0;
        return u;
    };
    gen.x0 = -0.29;
    gen.solution = [](double t) { return std::exp(t) * (-0.29 + 0.3) - 0.3; };
    return gen;
}

double relative_l1_error(const Trajectory& reference, const Trajectory& reduced,
                         bool per_channel_max) {
    if (reference.times.size() != reduced.times.size())
        throw std::invalid_argument("relative_l1_error: sample counts differ");
    if (reference.outputs.empty() || reduced.outputs.empty())
        throw std::invalid_argument("relative_l1_error: trajectories lack outputs");
    const Index channels = reference.outputs.front().size();
    if (reduced.outputs.front().size() != channels)
        throw std::invalid_argument("relative_l1_error: channel counts differ");

    // Rectangle-rule L1 norms; the step length cancels in each ratio but is
    // kept for readability of intermediate magnitudes.
    const double h = reference.step > 0.0 ? reference.step : 1.0;
    Vector diff = Vector::Zero(channels);
    Vector magnitude = Vector::Zero(channels);
    for (std::size_t k = 0; k < reference.outputs.size(); ++k) {
        diff += h * (reference.outputs[k] - reduced.outputs[k]).cwiseAbs();
        magnitude += h * reference.outputs[k].cwiseAbs();
    }

    if (per_channel_max) {
        double worst = 0.0;
        for (Index c = 0; c < channels; ++c) {
            if (magnitude(c) == 0.0)
                throw std::invalid_argument("relative_l1_error: zero reference channel");
            worst = std::max(worst, diff(c) / magnitude(c));
        }
        return worst;
    }
    const double denom = magnitude.sum();
    if (denom == 0.0)
        throw std::invalid_argument("relative_l1_error: zero reference signal");
    return diff.sum() / denom;
}

} // namespace mor
