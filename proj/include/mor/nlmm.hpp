#pragma once

#include "mor/basis.hpp"
#include "mor/generators.hpp"
#include "mor/newton.hpp"
#include "mor/systems.hpp"
#include "mor/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mor {

enum class InitialGuessPolicy {
    Auto,             // linearized when a linearization exists, else previous
    Zeros,
    Linearized,       // resolvent solve on the linearization per snapshot
    PreviousNeighbor, // converged direction at the previous collocation time
};

struct NlmmOptions {
    double newton_tol = 1e-8;
    int newton_max_iter = 50;
    std::optional<Index> r_defl;   // target order for the final SVD screen
    std::optional<double> sv_tol;  // or: relative singular value cutoff
    bool orthogonalize_inline = false; // Gram-Schmidt each column on arrival
    InitialGuessPolicy initial_guess_policy = InitialGuessPolicy::Auto;
    bool line_search = true;
    int threads = 1; // >1 solves generators concurrently (inline GS forces 1)

    // When a snapshot solve fails and an earlier snapshot of the same
    // generator converged, retry by marching from that solution through
    // bisected intermediate times, each solve warm-starting the next. The
    // intermediate solves only provide guesses; they never enter the basis.
    bool continuation_fallback = true;

    // Last resort after continuation: repeat the solve without step damping.
    // Full Newton steps overshoot past folds of the solution branch that trap
    // the damped iteration in merit-function stalls, at the price of landing
    // on large-norm roots occasionally.
    bool undamped_rescue = true;

    void validate() const; // throws std::invalid_argument
};

// One record per attempted basis column, in solve order.
struct NlmmColumnRecord {
    Index generator = 0;
    Index snapshot = 0;      // index into the collocation grid
    double time = 0.0;
    double x_val = 0.0;      // generator state at the snapshot
    int iterations = 0;
    double residual = 0.0;
    int bridge_solves = 0;   // intermediate continuation solves, if any
    bool undamped_retry = false; // converged only after dropping the damping
    bool converged = false;
    bool skipped_degenerate = false; // s_v vanished at a nonzero state
    bool dropped_dependent = false;  // inline orthogonalization flagged it
};

struct NlmmReport {
    std::vector<NlmmColumnRecord> columns;
    Index columns_attempted = 0;
    Index columns_retained = 0;  // entering the final deflation
    Vector singular_values;      // of the retained column collection
    Index deflated_order = 0;
    bool truncated_to_rank = false;

    bool any_dropped() const;
    std::string summary() const;
};

struct NlmmOutcome {
    ReducedBasis basis;
    NlmmReport report;
};

// Column-wise residual of the steady-state matching condition at one
// snapshot x* of a scalar nonlinear generator:
//   F(v) = f(v x*, r(x*)) - E v s_v(x*)
// (E is the optional descriptor mass matrix, identity when absent). Its root
// v is the direction the reduced basis collects.
Vector residual_nsg(const NonlinearSystem& sys, const NonlinearGenerator& gen,
                    double x_val, const Vector& v);

// Analytic Jacobian of the residual above: jac_f(v x*, r(x*)) x* - s_v(x*) E.
Matrix jacobian_nsg(const NonlinearSystem& sys, const NonlinearGenerator& gen,
                    double x_val, const Vector& v);

// Constant-input (equilibrium) variant: F(v) = f(v x0, r_dir x0), no
// generator dynamics term. The root satisfies v x0 = x_inf(u_const).
Vector residual_zsg(const NonlinearSystem& sys, const ZeroGenerator& gen,
                    const Vector& v);
Matrix jacobian_zsg(const NonlinearSystem& sys, const ZeroGenerator& gen,
                    const Vector& v);

// Resolvent initial guess v0 = (sigma E - A)^{-1} B r_dir from a
// linearization; exact for linear dynamics, a warm start otherwise.
Vector initial_guess_linearized(const LinearSystem& lin, double sigma,
                                const Vector& r_dir);

// Simulation-free reduced basis: for every generator i and collocation time
// t*_k, solve the matching condition by Newton from the configured initial
// guess, collect the converged directions in lexicographic (i, k) order, and
// compress them by SVD to r_defl (or sv_tol). Zero generators contribute a
// single time-independent solve. Non-convergent or degenerate columns are
// recorded and skipped rather than aborting; an entirely empty collection
// throws std::runtime_error. With identical inputs and options the result is
// bit-identical run to run.
NlmmOutcome nlmm_basis(const NonlinearSystem& sys,
                       const std::vector<SignalGenerator>& gens,
                       const CollocationGrid& grid,
                       const NlmmOptions& opts = {});

} // namespace mor
