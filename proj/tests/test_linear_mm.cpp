#include "mor/linear_mm.hpp"

#include "mor/harness.hpp"

#include <doctest.h>

#include <Eigen/QR>

#include <cmath>
#include <random>
#include <stdexcept>

using namespace mor;

namespace {

// Diagonal model with transfer function G(s) = sum_k 1/(s + k), k = 1..3.
// Everything about it is hand-computable.
LinearSystem diagonal_system() {
    Matrix A = Matrix::Zero(3, 3);
    A.diagonal() << -1.0, -2.0, -3.0;
    return LinearSystem(A, Matrix::Ones(3, 1), Matrix::Ones(1, 3));
}

// Scalar model x' = -x + u, y = 2x: G(s) = 2/(s+1).
LinearSystem scalar_system() {
    return LinearSystem(Matrix::Constant(1, 1, -1.0), Matrix::Ones(1, 1),
                        Matrix::Constant(1, 1, 2.0));
}

Matrix random_orthonormal(Index rows, Index cols, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    Matrix G(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) G(i, j) = dist(rng);
    return Matrix(Eigen::HouseholderQR<Matrix>(G).householderQ()).leftCols(cols);
}

} // namespace

TEST_CASE("ShiftSpec column counting and validation") {
    SUBCASE("simple real shifts contribute full input blocks") {
        const ShiftSpec spec = ShiftSpec::simple({0.5, 1.5});
        CHECK(spec.total_columns(1) == 2);
        CHECK(spec.total_columns(3) == 6);
        CHECK(spec.point_columns(0, 2) == 2);
    }

    SUBCASE("complex shifts expand to realified pairs") {
        ShiftSpec spec;
        spec.points.push_back({Complex(0.8, 1.1), 1, std::nullopt});
        CHECK(spec.point_columns(0, 1) == 2);
        CHECK(spec.total_columns(1) == 2);
    }

    SUBCASE("tangential shifts contribute one column each") {
        Vector d(2);
        d << 1.0, 0.0;
        const ShiftSpec spec = ShiftSpec::tangential({0.5, 1.5}, {d, d});
        CHECK(spec.total_columns(2) == 2);
    }

    SUBCASE("listing both members of a conjugate pair is rejected") {
        ShiftSpec spec;
        spec.points.push_back({Complex(0.8, 1.1), 1, std::nullopt});
        spec.points.push_back({Complex(0.8, -1.1), 1, std::nullopt});
        CHECK_THROWS_AS(spec.validate(1), std::invalid_argument);
    }

    SUBCASE("duplicate real shifts are rejected") {
        CHECK_THROWS_AS(ShiftSpec::simple({0.5, 0.5}).validate(1),
                        std::invalid_argument);
    }

    SUBCASE("tangent dimension must match the io dimension") {
        Vector d(3);
        d << 1.0, 0.0, 0.0;
        CHECK_THROWS_AS(ShiftSpec::tangential({0.5}, {d}).validate(2),
                        std::invalid_argument);
    }

    SUBCASE("empty specifications are rejected") {
        CHECK_THROWS_AS(ShiftSpec{}.validate(1), std::invalid_argument);
    }
}

TEST_CASE("moments reproduce hand-computed transfer function data") {
    SUBCASE("scalar model") {
        // G(s) = 2/(s+1) at s = 1: m0 = 1, m1 = G'(1) = -1/2.
        const MomentSet ms = moments(scalar_system(), Complex(1.0, 0.0), 2);
        CHECK(ms.m[0](0, 0).real() == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(ms.m[1](0, 0).real() == doctest::Approx(-0.5).epsilon(1e-13));
    }

    SUBCASE("diagonal model value and derivative") {
        // G(1) = 1/2 + 1/3 + 1/4 = 13/12, G'(1) = -(1/4 + 1/9 + 1/16).
        const MomentSet ms = moments(diagonal_system(), Complex(1.0, 0.0), 2);
        CHECK(ms.m[0](0, 0).real() == doctest::Approx(13.0 / 12.0).epsilon(1e-13));
        CHECK(ms.m[1](0, 0).real()
              == doctest::Approx(-0.4236111111111111).epsilon(1e-12));
    }

    SUBCASE("first moment equals the transfer function slope") {
        // Independent finite-difference cross-check of the moment chain.
        const LinearSystem sys = diagonal_system();
        const double sigma = 0.7, step = 1e-5;
        const double g_plus = moments(sys, Complex(sigma + step, 0.0), 1)
                                  .m[0](0, 0).real();
        const double g_minus = moments(sys, Complex(sigma - step, 0.0), 1)
                                  .m[0](0, 0).real();
        const double slope_fd = (g_plus - g_minus) / (2.0 * step);
        const double m1 = moments(sys, Complex(sigma, 0.0), 2).m[1](0, 0).real();
        CHECK(m1 == doctest::Approx(slope_fd).epsilon(1e-7));
    }

    SUBCASE("a shift on the spectrum is rejected") {
        CHECK_THROWS_AS(moments(diagonal_system(), Complex(-2.0, 0.0), 1),
                        std::runtime_error);
    }
}

TEST_CASE("krylov_basis spans the resolvent directions") {
    SUBCASE("single shift single input equals the normalized resolvent column") {
        const LinearSystem sys = diagonal_system();
        const double sigma = 0.5;
        const ReducedBasis basis = krylov_basis(sys, ShiftSpec::simple({sigma}));
        REQUIRE(basis.r() == 1);
        const Vector expect =
            (sigma * Matrix::Identity(3, 3) - sys.A).lu().solve(sys.B).col(0);
        CHECK(projector_distance(basis.V, expect.normalized()) < 1e-13);
    }

    SUBCASE("span is invariant under shift permutation") {
        std::mt19937_64 rng(11);
        const LinearSystem sys = random_stable_system(14, 2, 2, rng);
        const ReducedBasis a = krylov_basis(sys, ShiftSpec::simple({0.3, 1.7, 0.9}));
        const ReducedBasis b = krylov_basis(sys, ShiftSpec::simple({0.9, 0.3, 1.7}));
        CHECK(projector_distance(a.V, b.V) < 1e-10);
    }

    SUBCASE("provenance names every pre-deflation column") {
        const ReducedBasis basis =
            krylov_basis(diagonal_system(), ShiftSpec::simple({0.5, 1.5}));
        CHECK(basis.provenance.size() == 2);
    }
}

TEST_CASE("sylvester data satisfies its defining equation") {
    std::mt19937_64 rng(21);
    const LinearSystem sys = random_stable_system(16, 2, 2, rng);
    ShiftSpec spec;
    spec.points.push_back({Complex(0.4, 0.0), 2, std::nullopt});
    spec.points.push_back({Complex(0.9, 1.3), 1, std::nullopt});

    const SylvesterData data = sylvester_krylov_data(sys, spec);
    const double res = (sys.E * data.V * data.S - sys.A * data.V - sys.B * data.R).norm()
                       / (sys.B * data.R).norm();
    CHECK(res < 1e-11);

    SUBCASE("residual check accepts the basis and rejects noise") {
        const ReducedBasis basis = krylov_basis(sys, spec);
        CHECK(sylvester_residual(sys, basis.V, spec) < 1e-11);
        const Matrix noise = random_orthonormal(16, basis.r(), 22);
        CHECK(sylvester_residual(sys, noise, spec) > 1e-2);
    }

    SUBCASE("dual side mirrors the primal residual") {
        const ReducedBasis W = output_krylov_basis(sys, spec);
        CHECK(dual_sylvester_residual(sys, W.V, spec) < 1e-11);
    }
}

TEST_CASE("reduce_linear projects the realization") {
    SUBCASE("identity basis reproduces the model") {
        const LinearSystem sys = diagonal_system();
        const LinearSystem rom = reduce_linear(sys, Matrix::Identity(3, 3));
        CHECK((rom.A - sys.A).norm() == 0.0);
        CHECK((rom.B - sys.B).norm() == 0.0);
        CHECK((rom.C - sys.C).norm() == 0.0);
        CHECK((rom.E - sys.E).norm() == 0.0);
    }

    SUBCASE("a singular projected pencil is rejected") {
        const LinearSystem sys = diagonal_system();
        const Matrix V = Matrix::Identity(3, 1);
        Matrix W = Matrix::Zero(3, 1);
        W(1, 0) = 1.0;
        CHECK_THROWS_AS(reduce_linear(sys, V, W), std::runtime_error);
    }
}

TEST_CASE("projection interpolates moments at the shifts") {
    std::mt19937_64 rng(31);
    const LinearSystem sys = random_stable_system(18, 1, 1, rng);
    const ShiftSpec spec = ShiftSpec::simple({0.4, 1.3});

    SUBCASE("one-sided projection matches the zeroth moments") {
        const ReducedBasis V = krylov_basis(sys, spec);
        const LinearSystem rom = reduce_linear(sys, V.V);
        CHECK(check_moment_matching(sys, rom, spec, 1).max_rel_error() < 1e-10);
        // Negative control: first moments are not matched one-sided.
        CHECK(check_moment_matching(sys, rom, spec, 2).max_rel_error() > 1e-6);
    }

    SUBCASE("two-sided projection with equal shifts matches two moments") {
        const ReducedBasis V = krylov_basis(sys, spec);
        const ReducedBasis W = output_krylov_basis(sys, spec);
        const LinearSystem rom = reduce_linear(sys, V.V, W.V);
        CHECK(check_moment_matching(sys, rom, spec, 2).max_rel_error() < 1e-8);
    }

    SUBCASE("multiplicity two matches value and slope one-sided") {
        ShiftSpec hermite;
        hermite.points.push_back({Complex(0.6, 0.0), 2, std::nullopt});
        const ReducedBasis V = krylov_basis(sys, hermite);
        const LinearSystem rom = reduce_linear(sys, V.V);
        // orders_per_point = 0 checks each point's own multiplicity.
        CHECK(check_moment_matching(sys, rom, hermite).max_rel_error() < 1e-9);
    }

    SUBCASE("complex shift pair interpolates after realification") {
        ShiftSpec spec_c;
        spec_c.points.push_back({Complex(0.8, 1.1), 1, std::nullopt});
        const ReducedBasis V = krylov_basis(sys, spec_c);
        const LinearSystem rom = reduce_linear(sys, V.V);
        CHECK(check_moment_matching(sys, rom, spec_c, 1).max_rel_error() < 1e-9);
    }
}

TEST_CASE("tangential interpolation matches directional moments") {
    std::mt19937_64 rng(41);
    const LinearSystem sys = random_stable_system(18, 2, 2, rng);
    std::vector<double> shifts = {0.35, 1.05};
    std::vector<Vector> dirs;
    std::normal_distribution<double> dist(0.0, 1.0);
    for (std::size_t i = 0; i < shifts.size(); ++i) {
        Vector d(2);
        d << dist(rng), dist(rng);
        dirs.push_back(d.normalized());
    }
    const ShiftSpec spec = ShiftSpec::tangential(shifts, dirs);
    const ReducedBasis V = krylov_basis(sys, spec);
    CHECK(V.r() == 2);
    const LinearSystem rom = reduce_linear(sys, V.V);
    const MomentMatchReport report = check_moment_matching(sys, rom, spec, 1);
    CHECK(report.max_rel_error() < 1e-9);
    for (const auto& row : report.rows) CHECK(row.tangential);
}
