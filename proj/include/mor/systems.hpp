#pragma once

#include "mor/types.hpp"

#include <functional>
#include <optional>

namespace mor {

// Descriptor state-space model E x' = A x + B u, y = C x with nonsingular E.
// Dimensions are derived from the matrices at construction and validated once.
struct LinearSystem {
    Matrix E;
    Matrix A;
    Matrix B;
    Matrix C;
    Index n = 0; // states
    Index m = 0; // inputs
    Index p = 0; // outputs

    LinearSystem() = default;
    LinearSystem(Matrix E_, Matrix A_, Matrix B_, Matrix C_);

    // Convenience constructor for explicit models (E = I).
    LinearSystem(Matrix A_, Matrix B_, Matrix C_);
};

// General control-affine-free nonlinear model x' = f(x, u), y = h(x) given by
// callables plus an analytic state Jacobian. An optional linearization about
// the origin feeds initial-guess strategies; an optional mass matrix E turns
// the model into the descriptor form E x' = f(x, u) for basis construction
// (simulation requires the explicit form, fold E into f beforehand).
struct NonlinearSystem {
    Index n = 0;
    Index m = 0;
    Index p = 0;
    std::function<Vector(const Vector& x, const Vector& u)> f;
    std::function<Matrix(const Vector& x, const Vector& u)> jac_f; // d f / d x
    std::function<Vector(const Vector& x)> h;
    std::optional<LinearSystem> linearization;
    std::optional<Matrix> E; // descriptor mass matrix, identity when absent

    NonlinearSystem() = default;
    NonlinearSystem(Index n_, Index m_, Index p_,
                    std::function<Vector(const Vector&, const Vector&)> f_,
                    std::function<Matrix(const Vector&, const Vector&)> jac_f_,
                    std::function<Vector(const Vector&)> h_);
};

// Wraps a linear model as a NonlinearSystem (with the linearization attached),
// so integrators and reduction routines written for the general case apply.
// Descriptor E is folded in by solving, the wrapped f returns E^{-1}(Ax + Bu).
NonlinearSystem from_linear(const LinearSystem& sys);

struct SystemValidationReport {
    double equilibrium_residual = 0.0;   // |f(0,0)|_inf
    double output_residual = 0.0;        // |h(0)|_inf
    double max_jacobian_rel_error = 0.0; // analytic vs. finite differences
    bool equilibrium_ok = false;
    bool output_ok = false;
    bool jacobian_ok = false;

    bool passed() const { return equilibrium_ok && output_ok && jacobian_ok; }
};

// Checks f(0,0) = 0 and h(0) = 0 to 1e-12 and compares jac_f against central
// finite differences (step 1e-6 * (1 + |x_j|), tolerance 1e-5 relative) at
// `probes` pseudo-random states drawn from the given seed. Structural errors
// (f output length != n, Jacobian shape) throw; tolerance violations only
// show up in the report so callers can decide severity.
SystemValidationReport validate_system(const NonlinearSystem& sys,
                                       int probes = 5,
                                       unsigned seed = 20'240'101u);

// Central finite-difference approximation of d f / d x, exposed for tests.
Matrix fd_jacobian(const std::function<Vector(const Vector&, const Vector&)>& f,
                   const Vector& x, const Vector& u);

} // namespace mor
