#include "mor/pod.hpp"

#include <limits>
#include <stdexcept>

namespace mor {

Matrix snapshot_matrix(const Trajectory& traj, Index stride) {
    if (stride < 1) throw std::invalid_argument("snapshot_matrix: stride must be >= 1");
    if (traj.states.empty())
        throw std::invalid_argument("snapshot_matrix: trajectory has no states");

    const auto total = traj.states.size();
    std::vector<std::size_t> picks;
    for (std::size_t k = 0; k < total; k += static_cast<std::size_t>(stride))
        picks.push_back(k);

    Matrix snapshots(traj.states.front().size(), static_cast<Index>(picks.size()));
    for (std::size_t c = 0; c < picks.size(); ++c)
        snapshots.col(static_cast<Index>(c)) = traj.states[picks[c]];
    return snapshots;
}

namespace {

std::vector<BasisColumnInfo> pod_provenance(Index count) {
    const double no_time = std::numeric_limits<double>::quiet_NaN();
    std::vector<BasisColumnInfo> provenance;
    provenance.reserve(static_cast<std::size_t>(count));
    for (Index c = 0; c < count; ++c)
        provenance.push_back({"snapshot column " + std::to_string(c), no_time});
    return provenance;
}

} // namespace

ReducedBasis pod_basis(const Matrix& snapshots, Index r_defl) {
    DeflationResult defl = svd_deflate(snapshots, r_defl);
    return ReducedBasis(std::move(defl.V), BasisMethod::Pod,
                        pod_provenance(snapshots.cols()));
}

ReducedBasis pod_basis_tol(const Matrix& snapshots, double sv_tol) {
    DeflationResult defl = svd_deflate_tol(snapshots, sv_tol);
    return ReducedBasis(std::move(defl.V), BasisMethod::Pod,
                        pod_provenance(snapshots.cols()));
}

Vector pod_singular_values(const Matrix& snapshots) {
    return svd_deflate(snapshots, 1).singular_values;
}

} // namespace mor
