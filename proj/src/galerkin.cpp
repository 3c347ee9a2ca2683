#include "mor/galerkin.hpp"

#include "mor/linear_mm.hpp"

#include <stdexcept>

namespace mor {

ReducedNonlinearSystem reduce_nonlinear(const NonlinearSystem& sys, const Matrix& V) {
    if (!sys.f || !sys.jac_f)
        throw std::runtime_error("reduce_nonlinear: f and jac_f are required");
    if (sys.E)
        throw std::runtime_error(
            "reduce_nonlinear: fold the descriptor mass matrix into f first");
    if (V.rows() != sys.n || V.cols() < 1 || V.cols() > sys.n)
        throw std::invalid_argument("reduce_nonlinear: V must be n x r with 1 <= r <= n");
    if (orthonormality_error(V) > 1e-10)
        throw std::invalid_argument(
            "reduce_nonlinear: V is not orthonormal; the projection would be biased");

    ReducedNonlinearSystem reduced;
    reduced.V = V;
    const Matrix& Vb = reduced.V;

    NonlinearSystem rom;
    rom.n = V.cols();
    rom.m = sys.m;
    rom.p = sys.p;
    rom.f = [Vb, f = sys.f](const Vector& x_r, const Vector& u) -> Vector {
        return Vb.transpose() * f(Vb * x_r, u);
    };
    rom.jac_f = [Vb, jac = sys.jac_f](const Vector& x_r, const Vector& u) -> Matrix {
        return Vb.transpose() * jac(Vb * x_r, u) * Vb;
    };
    if (sys.h)
        rom.h = [Vb, h = sys.h](const Vector& x_r) -> Vector { return h(Vb * x_r); };
    if (sys.linearization)
        rom.linearization = reduce_linear(*sys.linearization, Vb);
    reduced.rom = std::move(rom);
    return reduced;
}

ReducedNonlinearSystem reduce_nonlinear(const NonlinearSystem& sys,
                                        const ReducedBasis& basis) {
    return reduce_nonlinear(sys, basis.V);
}

Vector lift(const Matrix& V, const Vector& x_r) {
    if (x_r.size() != V.cols())
        throw std::invalid_argument("lift: reduced state length != r");
    return V * x_r;
}

Vector project(const Matrix& V, const Vector& x) {
    if (x.size() != V.rows())
        throw std::invalid_argument("project: full state length != n");
    return V.transpose() * x;
}

} // namespace mor
