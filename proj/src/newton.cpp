#include "mor/newton.hpp"

#include <Eigen/LU>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mor {

namespace {

double inf_norm(const Vector& v) { return v.lpNorm<Eigen::Infinity>(); }

bool finite(const Vector& v) { return v.allFinite(); }

// Solves J d = -F, falling back to increasing diagonal regularization when
// the factorization produces a useless (non-finite) step. Returns false when
// no finite step could be obtained.
bool newton_step(const Matrix& J, const Vector& F, Vector& d) {
    d = Eigen::PartialPivLU<Matrix>(J).solve(-F);
    if (finite(d)) return true;
    const double scale = std::max(J.cwiseAbs().maxCoeff(), 1.0);
    double lambda = 1e-12 * scale;
    for (int attempt = 0; attempt < 8; ++attempt) {
        Matrix Jreg = J;
        Jreg.diagonal().array() += lambda;
        d = Eigen::PartialPivLU<Matrix>(Jreg).solve(-F);
        if (finite(d)) return true;
        lambda *= 100.0;
    }
    return false;
}

} // namespace

NewtonResult newton_solve(const std::function<Vector(const Vector&)>& F,
                          const std::function<Matrix(const Vector&)>& J,
                          Vector v0, const NewtonOptions& opts) {
    if (!F || !J) throw std::invalid_argument("newton_solve: F and J are required");
    if (!(opts.tol > 0.0)) throw std::invalid_argument("newton_solve: tol must be > 0");
    if (opts.max_iter < 1) throw std::invalid_argument("newton_solve: max_iter must be >= 1");

    NewtonResult result;
    result.x = std::move(v0);

    Vector Fx = F(result.x);
    if (Fx.size() != result.x.size())
        throw std::invalid_argument("newton_solve: F output length != unknown length");
    if (!finite(Fx)) return result; // hopeless start, report non-convergence
    double norm = inf_norm(Fx);

    for (int iter = 0; iter < opts.max_iter; ++iter) {
        if (norm <= opts.tol) {
            result.converged = true;
            break;
        }

        Vector d;
        if (!newton_step(J(result.x), Fx, d)) break;

        // Backtracking on |F|_inf: halve the step until it improves on the
        // current residual; with line_search off the full step is taken
        // unconditionally (textbook iteration).
        double alpha = 1.0;
        Vector best_x = result.x + d;
        Vector best_F = F(best_x);
        double best_norm = finite(best_F) ? inf_norm(best_F)
                                          : std::numeric_limits<double>::infinity();
        if (opts.line_search) {
            Vector cand_x, cand_F;
            for (int halving = 0; halving < opts.max_halvings && best_norm >= norm;
                 ++halving) {
                alpha *= 0.5;
                cand_x = result.x + alpha * d;
                cand_F = F(cand_x);
                const double cand_norm = finite(cand_F)
                                             ? inf_norm(cand_F)
                                             : std::numeric_limits<double>::infinity();
                if (cand_norm < best_norm) {
                    best_x = cand_x;
                    best_F = cand_F;
                    best_norm = cand_norm;
                }
            }
        }
        if (!std::isfinite(best_norm)) break; // every candidate blew up

        result.x = std::move(best_x);
        Fx = std::move(best_F);
        norm = best_norm;
        result.iterations = iter + 1;
    }

    result.residual_norm = norm;
    if (norm <= opts.tol) result.converged = true;
    return result;
}

} // namespace mor
