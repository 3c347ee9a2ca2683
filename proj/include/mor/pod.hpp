#pragma once

#include "mor/basis.hpp"
#include "mor/integration.hpp"
#include "mor/types.hpp"

namespace mor {

// Snapshot matrix from a trajectory: states at sample indices 0, stride,
// 2*stride, ... (the first sample is always included). stride >= 1.
Matrix snapshot_matrix(const Trajectory& traj, Index stride = 1);

// POD basis of a snapshot collection: the r_defl dominant left singular
// vectors of the raw (uncentered) snapshot matrix. Shares the SVD screen
// with the other reduction paths, so rank-deficient data truncates to rank
// instead of padding.
ReducedBasis pod_basis(const Matrix& snapshots, Index r_defl);
ReducedBasis pod_basis_tol(const Matrix& snapshots, double sv_tol);

// Singular values of the snapshot matrix, for energy/decay diagnostics.
Vector pod_singular_values(const Matrix& snapshots);

} // namespace mor
