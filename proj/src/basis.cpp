#include "mor/basis.hpp"

#include <Eigen/SVD>

#include <stdexcept>

namespace mor {

std::string to_string(BasisMethod method) {
    switch (method) {
    case BasisMethod::Nlmm: return "nlmm";
    case BasisMethod::Pod: return "pod";
    case BasisMethod::Krylov: return "krylov";
    }
    return "unknown";
}

ReducedBasis::ReducedBasis(Matrix V_, BasisMethod method_,
                           std::vector<BasisColumnInfo> provenance_, double tol)
    : V(std::move(V_)), method(method_), provenance(std::move(provenance_)) {
    if (V.cols() < 1 || V.rows() < V.cols())
        throw std::invalid_argument("ReducedBasis: need n >= r >= 1");
    const double defect = orthonormality_error(V);
    if (defect > tol)
        throw std::invalid_argument("ReducedBasis: columns are not orthonormal");
}

double orthonormality_error(const Matrix& V) {
    const Index r = V.cols();
    return (V.transpose() * V - Matrix::Identity(r, r)).norm();
}

double projector_distance(const Matrix& V, const Matrix& W) {
    if (V.rows() != W.rows())
        throw std::invalid_argument("projector_distance: row dimensions differ");
    // Form |VV' - WW'|_F from the explicit difference.  The closed form
    // sqrt(r_V + r_W - 2 |V'W|_F^2) is cheaper but cancels catastrophically
    // near zero, leaving a noise floor around sqrt(eps); the explicit
    // difference resolves distances down to machine precision.
    return (V * V.transpose() - W * W.transpose()).norm();
}

bool gram_schmidt_append(Matrix& V, Index col, double drop_tol) {
    if (col < 0 || col >= V.cols())
        throw std::invalid_argument("gram_schmidt_append: column index out of range");
    const double norm_before = V.col(col).norm();
    if (norm_before == 0.0) return false;
    // Two MGS sweeps; the second pass mops up the cancellation the first one
    // leaves behind when the new column is nearly dependent.
    for (int pass = 0; pass < 2; ++pass) {
        for (Index j = 0; j < col; ++j) {
            const double coeff = V.col(j).dot(V.col(col));
            V.col(col) -= coeff * V.col(j);
        }
    }
    const double norm_after = V.col(col).norm();
    if (norm_after < drop_tol * norm_before) return false;
    V.col(col) /= norm_after;
    return true;
}

namespace {

DeflationResult deflate_impl(const Matrix& V, Index r_defl, double sv_tol, bool by_count) {
    if (V.cols() < 1) throw std::invalid_argument("svd_deflate: empty column collection");
    Eigen::BDCSVD<Matrix> svd(V, Eigen::ComputeThinU);
    const Vector& sv = svd.singularValues();

    // Numerical rank with the usual relative gap cutoff.
    const double rank_cut = sv(0) * 1e-13 * static_cast<double>(std::max(V.rows(), V.cols()));
    Index rank = 0;
    for (Index i = 0; i < sv.size(); ++i)
        if (sv(i) > rank_cut) ++rank;
    if (rank == 0) throw std::runtime_error("svd_deflate: column collection has rank zero");

    DeflationResult result;
    result.singular_values = sv;
    if (by_count) {
        if (r_defl < 1) throw std::invalid_argument("svd_deflate: r_defl must be >= 1");
        result.retained = std::min(r_defl, rank);
        result.truncated_to_rank = r_defl > rank;
    } else {
        if (!(sv_tol > 0.0) || sv_tol >= 1.0)
            throw std::invalid_argument("svd_deflate: sv_tol must lie in (0, 1)");
        Index keep = 0;
        for (Index i = 0; i < sv.size(); ++i)
            if (sv(i) > sv_tol * sv(0)) ++keep;
        result.retained = std::min(std::max<Index>(keep, 1), rank);
    }
    result.V = svd.matrixU().leftCols(result.retained);
    return result;
}

} // namespace

DeflationResult svd_deflate(const Matrix& V, Index r_defl) {
    return deflate_impl(V, r_defl, 0.0, true);
}

DeflationResult svd_deflate_tol(const Matrix& V, double sv_tol) {
    return deflate_impl(V, 0, sv_tol, false);
}

} // namespace mor
