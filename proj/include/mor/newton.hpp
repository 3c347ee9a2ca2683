#pragma once

#include "mor/types.hpp"

#include <functional>

namespace mor {

struct NewtonOptions {
    double tol = 1e-8;      // on |F(v)|_inf
    int max_iter = 50;
    bool line_search = true; // false recovers the plain full-step iteration
    int max_halvings = 30;
};

struct NewtonResult {
    Vector x;
    double residual_norm = 0.0; // |F(x)|_inf at the returned iterate
    int iterations = 0;
    bool converged = false;
};

// Damped Newton iteration for F(v) = 0 with a user-supplied Jacobian.
//
// Each step solves J(v) d = -F(v) by LU and backtracks the step length
// (halving, at most max_halvings times) until |F| decreases; if no decrease
// is found the best candidate seen is taken anyway and the iteration
// continues, leaving divergence to the iteration cap. A Jacobian that
// produces a non-finite step is retried with increasing diagonal
// regularization; if that also fails the result reports non-convergence.
//
// Convergence is checked before the first step, so an exact initial guess
// returns with zero iterations and an affine F converges in one.
NewtonResult newton_solve(const std::function<Vector(const Vector&)>& F,
                          const std::function<Matrix(const Vector&)>& J,
                          Vector v0, const NewtonOptions& opts = {});

} // namespace mor
