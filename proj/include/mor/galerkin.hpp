#pragma once

#include "mor/basis.hpp"
#include "mor/systems.hpp"
#include "mor/types.hpp"

namespace mor {

// Galerkin-projected model x_r' = V' f(V x_r, u), y_r = h(V x_r) for an
// orthonormal V. Keeps the basis alongside the callables so states can be
// lifted back without extra bookkeeping.
struct ReducedNonlinearSystem {
    Matrix V;
    NonlinearSystem rom; // rom.n = r; f, jac_f, h are the projected maps

    Index full_order() const { return V.rows(); }
    Index reduced_order() const { return V.cols(); }
};

// Builds the projected model. Throws std::invalid_argument when V is not
// orthonormal to 1e-10 (non-square-ness of the projector would silently bias
// every downstream result) or dimensions mismatch, and std::runtime_error if
// the source model lacks f or jac_f. Descriptor sources are rejected; fold
// the mass matrix into f first.
ReducedNonlinearSystem reduce_nonlinear(const NonlinearSystem& sys, const Matrix& V);
ReducedNonlinearSystem reduce_nonlinear(const NonlinearSystem& sys, const ReducedBasis& basis);

Vector lift(const Matrix& V, const Vector& x_r);    // V x_r
Vector project(const Matrix& V, const Vector& x);   // V' x

} // namespace mor
