#pragma once

#include "mor/basis.hpp"
#include "mor/systems.hpp"
#include "mor/types.hpp"

#include <optional>
#include <vector>

namespace mor {

// Interpolation data for rational Krylov projection: where to match
// (shifts), how many moments per shift (multiplicity), and optionally along
// which input/output directions (tangent). Without a tangent a shift
// contributes full blocks, one column per system input (or output, on the
// dual side).
//
// Complex shifts are listed once with either sign of the imaginary part and
// expand to paired real columns (real and imaginary parts); listing both
// members of a conjugate pair is rejected as a duplicate since they span the
// same real subspace.
struct ShiftSpec {
    struct Point {
        Complex sigma;
        int multiplicity = 1;
        std::optional<ComplexVector> tangent;
    };
    std::vector<Point> points;

    static ShiftSpec simple(const std::vector<double>& shifts);
    static ShiftSpec tangential(const std::vector<double>& shifts,
                                const std::vector<Vector>& directions);

    // Real columns produced per point and in total, for a system with
    // `io_dim` inputs (primal) or outputs (dual).
    Index point_columns(std::size_t idx, Index io_dim) const;
    Index total_columns(Index io_dim) const;

    void validate(Index io_dim) const; // throws std::invalid_argument
};

// Moments m_i(sigma) = (-1)^i C ((sigma E - A)^{-1} E)^i (sigma E - A)^{-1} B,
// the Taylor coefficients of the transfer function about sigma.
struct MomentSet {
    Complex sigma;
    std::vector<ComplexMatrix> m; // m[i] is p x m
};

// Computes moments 0 .. count-1 at one shift, factoring (sigma E - A) once
// and reusing it for the chain of solves. Throws std::runtime_error when the
// shift (numerically) hits the spectrum.
MomentSet moments(const LinearSystem& sys, Complex sigma, int count);

// Raw (non-orthonormalized) rational Krylov directions V together with the
// pair (S, R) they interpolate: E V S - A V = B R. S is block diagonal, one
// block per shift, each block a Jordan-like matrix with the shift on the
// diagonal and -1 off-diagonal entries coupling consecutive moment orders;
// complex shifts appear as 2x2 rotation blocks after realification.
struct SylvesterData {
    Matrix V; // n x r, raw directions
    Matrix S; // r x r
    Matrix R; // m x r
};

SylvesterData sylvester_krylov_data(const LinearSystem& sys, const ShiftSpec& spec);

// Orthonormalized input rational Krylov basis (modified Gram-Schmidt with
// one reorthogonalization pass; numerically dependent columns are deflated).
ReducedBasis krylov_basis(const LinearSystem& sys, const ShiftSpec& spec);

// Dual side: W spans the output directions ((mu E - A)^{-T} C^T l and the
// corresponding higher-order chain), computed by the primal machinery on the
// transposed system. Tangents must then be p-dimensional.
ReducedBasis output_krylov_basis(const LinearSystem& sys, const ShiftSpec& spec);
SylvesterData output_sylvester_data(const LinearSystem& sys, const ShiftSpec& spec);

// Relative residual |E Vp S - A Vp - B R|_F / |B R|_F where Vp is the
// projection of the freshly recomputed raw directions onto span(V). A basis
// spanning the rational Krylov subspace gives a residual at roundoff level no
// matter how its columns were mixed by orthonormalization; an unrelated
// subspace gives O(1).
double sylvester_residual(const LinearSystem& sys, const Matrix& V, const ShiftSpec& spec);

// Same check for an output basis W against the transposed operator.
double dual_sylvester_residual(const LinearSystem& sys, const Matrix& W, const ShiftSpec& spec);

// Petrov-Galerkin projection (E_r, A_r, B_r, C_r) = (W'EV, W'AV, W'B, CV).
// W defaults to V (Galerkin). Throws std::runtime_error when W'EV is
// singular, i.e. the pencil cannot be projected with these bases.
LinearSystem reduce_linear(const LinearSystem& sys, const Matrix& V,
                           const std::optional<Matrix>& W = std::nullopt);

struct MomentMatchReport {
    struct Row {
        Complex sigma;
        int order = 0;
        bool tangential = false;
        double abs_error = 0.0;
        double rel_error = 0.0;
    };
    std::vector<Row> rows;

    double max_rel_error() const;
};

// Compares FOM and ROM moments at every listed shift point. Orders 0 ..
// orders_per_point-1 are checked (0 means "use each point's multiplicity").
// With a tangent the comparison is of m_i(sigma) * tangent, matching what a
// tangential basis is built to interpolate.
MomentMatchReport check_moment_matching(const LinearSystem& fom,
                                        const LinearSystem& rom,
                                        const ShiftSpec& spec,
                                        int orders_per_point = 0);

} // namespace mor
