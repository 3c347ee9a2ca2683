#pragma once

#include "mor/types.hpp"

#include <string>
#include <vector>

namespace mor {

enum class BasisMethod { Nlmm, Pod, Krylov };

std::string to_string(BasisMethod method);

// Per-column origin of a basis before any deflation. snapshot_time is NaN for
// columns that have no time attached (equilibrium solves, Krylov directions).
struct BasisColumnInfo {
    std::string source;
    double snapshot_time;
};

// Orthonormal projection basis V (n x r) plus how it was produced. The
// constructor enforces |V^T V - I|_F <= tol so every construction path ends
// in a certified basis.
struct ReducedBasis {
    Matrix V;
    BasisMethod method = BasisMethod::Pod;
    std::vector<BasisColumnInfo> provenance; // pre-deflation column origins

    ReducedBasis() = default;
    ReducedBasis(Matrix V_, BasisMethod method_,
                 std::vector<BasisColumnInfo> provenance_ = {},
                 double tol = 1e-10);

    Index n() const { return V.rows(); }
    Index r() const { return V.cols(); }
};

// |V^T V - I|_F, the orthonormality defect.
double orthonormality_error(const Matrix& V);

// Frobenius distance between the orthogonal projectors V V^T and W W^T.
// Span-sensitive, basis-insensitive; the workhorse subspace comparison.
double projector_distance(const Matrix& V, const Matrix& W);

// Orthogonalizes column `col` of V in place against columns [0, col) by
// modified Gram-Schmidt with one reorthogonalization pass, then normalizes.
// Returns false (column flagged as numerically dependent, left unnormalized)
// when the post-orthogonalization norm drops below drop_tol times the
// original norm.
bool gram_schmidt_append(Matrix& V, Index col, double drop_tol = 1e-10);

struct DeflationResult {
    Matrix V;               // leading left singular vectors, orthonormal
    Vector singular_values; // all singular values of the input, descending
    Index retained = 0;
    bool truncated_to_rank = false; // requested order exceeded numerical rank
};

// SVD screening of a raw column collection: keep the `r_defl` dominant left
// singular vectors. Requests beyond the numerical rank are truncated to the
// rank (with the flag set) rather than padding with noise directions.
DeflationResult svd_deflate(const Matrix& V, Index r_defl);

// Tolerance form: retain singular values > sv_tol * s_max.
DeflationResult svd_deflate_tol(const Matrix& V, double sv_tol);

} // namespace mor
