#include "mor/linear_mm.hpp"

#include <Eigen/LU>
#include <Eigen/QR>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mor {

namespace {

bool point_is_complex(const ShiftSpec::Point& point) {
    if (point.sigma.imag() != 0.0) return true;
    if (point.tangent && point.tangent->imag().cwiseAbs().maxCoeff() > 0.0) return true;
    return false;
}

std::string shift_label(const ShiftSpec::Point& point, int order) {
    std::ostringstream out;
    out << "shift " << point.sigma.real();
    if (point.sigma.imag() != 0.0) out << (point.sigma.imag() > 0 ? "+" : "") << point.sigma.imag() << "i";
    out << ", order " << order;
    return out.str();
}

ReducedBasis orthonormalize_columns(const Matrix& raw, BasisMethod method,
                                    std::vector<BasisColumnInfo> provenance) {
    Matrix Q(raw.rows(), raw.cols());
    Index kept = 0;
    for (Index c = 0; c < raw.cols(); ++c) {
        Q.col(kept) = raw.col(c);
        if (gram_schmidt_append(Q, kept)) ++kept;
    }
    if (kept == 0)
        throw std::runtime_error("krylov_basis: every direction deflated to zero");
    return ReducedBasis(Q.leftCols(kept), method, std::move(provenance));
}

std::vector<BasisColumnInfo> krylov_provenance(const ShiftSpec& spec, Index io_dim) {
    const double no_time = std::numeric_limits<double>::quiet_NaN();
    std::vector<BasisColumnInfo> provenance;
    for (std::size_t pi = 0; pi < spec.points.size(); ++pi) {
        const ShiftSpec::Point& point = spec.points[pi];
        const Index width = point.tangent ? 1 : io_dim;
        const bool cplx = point_is_complex(point);
        for (int order = 0; order < point.multiplicity; ++order) {
            for (Index a = 0; a < width; ++a)
                provenance.push_back({shift_label(point, order), no_time});
            if (cplx)
                for (Index a = 0; a < width; ++a)
                    provenance.push_back({shift_label(point, order) + " (imag)", no_time});
        }
    }
    return provenance;
}

LinearSystem transposed(const LinearSystem& sys) {
    return LinearSystem(sys.E.transpose(), sys.A.transpose(),
                        sys.C.transpose(), sys.B.transpose());
}

double residual_on_span(const Matrix& E, const Matrix& A, const Matrix& B,
                        const SylvesterData& data, const Matrix& V) {
    if (V.rows() != A.rows())
        throw std::invalid_argument("sylvester_residual: basis row count != n");
    if (V.cols() < 1)
        throw std::invalid_argument("sylvester_residual: empty basis");
    // Orthonormalization mixes the raw directions by an invertible upper
    // triangular factor, so the interpolation identity holds on span(V) with
    // transformed coefficients. Recover them by least squares and evaluate
    // the identity on the projected directions: a basis spanning the Krylov
    // space reproduces them exactly, anything else leaves an O(1) defect.
    Matrix M = V.colPivHouseholderQr().solve(data.V);
    Matrix Vp = V * M;
    const double denom = (B * data.R).norm();
    if (denom == 0.0)
        throw std::invalid_argument("sylvester_residual: zero excitation B R");
    return (E * Vp * data.S - A * Vp - B * data.R).norm() / denom;
}

} // namespace

ShiftSpec ShiftSpec::simple(const std::vector<double>& shifts) {
    ShiftSpec spec;
    for (double s : shifts) spec.points.push_back({Complex(s, 0.0), 1, std::nullopt});
    return spec;
}

ShiftSpec ShiftSpec::tangential(const std::vector<double>& shifts,
                                const std::vector<Vector>& directions) {
    if (shifts.size() != directions.size())
        throw std::invalid_argument("ShiftSpec: one direction per shift required");
    ShiftSpec spec;
    for (std::size_t i = 0; i < shifts.size(); ++i)
        spec.points.push_back(
            {Complex(shifts[i], 0.0), 1, directions[i].cast<Complex>()});
    return spec;
}

Index ShiftSpec::point_columns(std::size_t idx, Index io_dim) const {
    const Point& point = points.at(idx);
    const Index width = point.tangent ? 1 : io_dim;
    return static_cast<Index>(point.multiplicity) * width
           * (point_is_complex(point) ? 2 : 1);
}

Index ShiftSpec::total_columns(Index io_dim) const {
    Index total = 0;
    for (std::size_t i = 0; i < points.size(); ++i) total += point_columns(i, io_dim);
    return total;
}

void ShiftSpec::validate(Index io_dim) const {
    if (points.empty()) throw std::invalid_argument("ShiftSpec: no interpolation points");
    for (const Point& point : points) {
        if (!std::isfinite(point.sigma.real()) || !std::isfinite(point.sigma.imag()))
            throw std::invalid_argument("ShiftSpec: shifts must be finite");
        if (point.multiplicity < 1)
            throw std::invalid_argument("ShiftSpec: multiplicities must be >= 1");
        if (point.tangent) {
            if (point.tangent->size() != io_dim)
                throw std::invalid_argument("ShiftSpec: tangent length must match io dim");
            if (point.tangent->norm() == 0.0)
                throw std::invalid_argument("ShiftSpec: tangent must be nonzero");
        }
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            if (points[i].sigma == points[j].sigma)
                throw std::invalid_argument(
                    "ShiftSpec: duplicate shift; express repeats via multiplicity");
            if (points[i].sigma.imag() != 0.0
                && points[i].sigma == std::conj(points[j].sigma))
                throw std::invalid_argument(
                    "ShiftSpec: conjugate pair listed twice; one member expands to both");
        }
    }
}

MomentSet moments(const LinearSystem& sys, Complex sigma, int count) {
    if (count < 1) throw std::invalid_argument("moments: count must be >= 1");
    MomentSet set;
    set.sigma = sigma;
    set.m.reserve(static_cast<std::size_t>(count));

    // Factor (sigma E - A) once and chain the solves:
    //   X_0 = (sigma E - A)^{-1} B,  X_i = (sigma E - A)^{-1} E X_{i-1},
    //   m_i = (-1)^i C X_i.
    // Real shifts stay entirely in real arithmetic.
    if (sigma.imag() == 0.0) {
        Eigen::FullPivLU<Matrix> lu(sigma.real() * sys.E - sys.A);
        if (!lu.isInvertible())
            throw std::runtime_error("moments: shift hits the pencil spectrum");
        Matrix X = lu.solve(sys.B);
        double sign = 1.0;
        for (int i = 0; i < count; ++i) {
            set.m.push_back((sign * (sys.C * X)).cast<Complex>());
            if (i + 1 < count) {
                X = lu.solve(sys.E * X);
                sign = -sign;
            }
        }
    } else {
        const ComplexMatrix Ec = sys.E.cast<Complex>();
        Eigen::FullPivLU<ComplexMatrix> lu(sigma * Ec - sys.A.cast<Complex>());
        if (!lu.isInvertible())
            throw std::runtime_error("moments: shift hits the pencil spectrum");
        ComplexMatrix X = lu.solve(sys.B.cast<Complex>());
        double sign = 1.0;
        for (int i = 0; i < count; ++i) {
            set.m.push_back(sign * (sys.C.cast<Complex>() * X));
            if (i + 1 < count) {
                X = lu.solve(Ec * X);
                sign = -sign;
            }
        }
    }
    return set;
}

SylvesterData sylvester_krylov_data(const LinearSystem& sys, const ShiftSpec& spec) {
    spec.validate(sys.m);
    const Index r = spec.total_columns(sys.m);
    SylvesterData data;
    data.V = Matrix::Zero(sys.n, r);
    data.S = Matrix::Zero(r, r);
    data.R = Matrix::Zero(sys.m, r);

    const ComplexMatrix Ec = sys.E.cast<Complex>();
    const ComplexMatrix Ac = sys.A.cast<Complex>();

    Index offset = 0;
    for (std::size_t pi = 0; pi < spec.points.size(); ++pi) {
        const ShiftSpec::Point& point = spec.points[pi];
        const bool cplx = point_is_complex(point);
        const Index width = point.tangent ? 1 : sys.m;
        const Index group = width * (cplx ? 2 : 1); // real columns per order
        const double alpha = point.sigma.real();
        const double beta = point.sigma.imag();

        Eigen::FullPivLU<ComplexMatrix> lu(point.sigma * Ec - Ac);
        if (!lu.isInvertible())
            throw std::runtime_error(
                "sylvester_krylov_data: shift hits the pencil spectrum");

        // Order-zero excitation: one tangential column B t or the full block B.
        const ComplexMatrix rhs =
            point.tangent ? ComplexMatrix(sys.B.cast<Complex>() * *point.tangent)
                          : ComplexMatrix(sys.B.cast<Complex>());

        ComplexMatrix X = lu.solve(rhs);
        for (int order = 0; order < point.multiplicity; ++order) {
            const Index base = offset + order * group;
            // Realified columns: [Re | Im] for complex points; for real
            // points the solve never leaves real arithmetic values.
            data.V.middleCols(base, width) = X.real();
            if (cplx) data.V.middleCols(base + width, width) = X.imag();

            for (Index a = 0; a < width; ++a) {
                const Index re = base + a;
                data.S(re, re) = alpha;
                if (cplx) {
                    const Index im = base + width + a;
                    data.S(im, im) = alpha;
                    data.S(im, re) = -beta;
                    data.S(re, im) = beta;
                }
                if (order > 0) {
                    // Consecutive moment orders couple through -1 entries.
                    data.S(re - group, re) = -1.0;
                    if (cplx) data.S(base + width + a - group, base + width + a) = -1.0;
                }
            }
            if (order == 0) {
                if (point.tangent) {
                    data.R.col(base) = point.tangent->real();
                    if (cplx) data.R.col(base + width) = point.tangent->imag();
                } else {
                    // Block excitation is the identity; a complex shift still
                    // has zero imaginary excitation, only the directions split.
                    data.R.middleCols(base, width) = Matrix::Identity(sys.m, sys.m);
                }
            }
            if (order + 1 < point.multiplicity) X = lu.solve(Ec * X);
        }
        offset += spec.point_columns(pi, sys.m);
    }
    return data;
}

ReducedBasis krylov_basis(const LinearSystem& sys, const ShiftSpec& spec) {
    const SylvesterData data = sylvester_krylov_data(sys, spec);
    return orthonormalize_columns(data.V, BasisMethod::Krylov,
                                  krylov_provenance(spec, sys.m));
}

SylvesterData output_sylvester_data(const LinearSystem& sys, const ShiftSpec& spec) {
    return sylvester_krylov_data(transposed(sys), spec);
}

ReducedBasis output_krylov_basis(const LinearSystem& sys, const ShiftSpec& spec) {
    const SylvesterData data = output_sylvester_data(sys, spec);
    return orthonormalize_columns(data.V, BasisMethod::Krylov,
                                  krylov_provenance(spec, sys.p));
}

double sylvester_residual(const LinearSystem& sys, const Matrix& V, const ShiftSpec& spec) {
    const SylvesterData data = sylvester_krylov_data(sys, spec);
    return residual_on_span(sys.E, sys.A, sys.B, data, V);
}

double dual_sylvester_residual(const LinearSystem& sys, const Matrix& W,
                               const ShiftSpec& spec) {
    const LinearSystem dual = transposed(sys);
    const SylvesterData data = sylvester_krylov_data(dual, spec);
    return residual_on_span(dual.E, dual.A, dual.B, data, W);
}

LinearSystem reduce_linear(const LinearSystem& sys, const Matrix& V,
                           const std::optional<Matrix>& W) {
    if (V.rows() != sys.n || V.cols() < 1 || V.cols() > sys.n)
        throw std::invalid_argument("reduce_linear: V must be n x r with 1 <= r <= n");
    const Matrix& Wm = W ? *W : V;
    if (Wm.rows() != sys.n || Wm.cols() != V.cols())
        throw std::invalid_argument("reduce_linear: W must match V in shape");

    Matrix E_r = Wm.transpose() * sys.E * V;
    if (!Eigen::FullPivLU<Matrix>(E_r).isInvertible())
        throw std::runtime_error("reduce_linear: W'EV is singular, bases are incompatible");
    return LinearSystem(std::move(E_r), Wm.transpose() * sys.A * V,
                        Wm.transpose() * sys.B, sys.C * V);
}

double MomentMatchReport::max_rel_error() const {
    double worst = 0.0;
    for (const Row& row : rows) worst = std::max(worst, row.rel_error);
    return worst;
}

MomentMatchReport check_moment_matching(const LinearSystem& fom,
                                        const LinearSystem& rom,
                                        const ShiftSpec& spec,
                                        int orders_per_point) {
    if (fom.m != rom.m || fom.p != rom.p)
        throw std::invalid_argument("check_moment_matching: input/output dims differ");
    spec.validate(fom.m);

    MomentMatchReport report;
    for (const ShiftSpec::Point& point : spec.points) {
        const int count = orders_per_point > 0 ? orders_per_point : point.multiplicity;
        const MomentSet mf = moments(fom, point.sigma, count);
        const MomentSet mr = moments(rom, point.sigma, count);
        for (int i = 0; i < count; ++i) {
            MomentMatchReport::Row row;
            row.sigma = point.sigma;
            row.order = i;
            row.tangential = point.tangent.has_value();
            ComplexMatrix ref = mf.m[static_cast<std::size_t>(i)];
            ComplexMatrix red = mr.m[static_cast<std::size_t>(i)];
            if (point.tangent) {
                ref = ref * *point.tangent;
                red = red * *point.tangent;
            }
            row.abs_error = (ref - red).norm();
            row.rel_error = row.abs_error / std::max(ref.norm(), 1e-300);
            report.rows.push_back(row);
        }
    }
    return report;
}

} // namespace mor
