#include "mor/nlmm.hpp"

#include "mor/integration.hpp"

#include <Eigen/LU>

#include <cmath>
#include <future>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mor {

namespace {

// Shared core of the matching residual: F(v) = f(v x*, u*) - E v s* where
// s* and u* are the generator dynamics and input frozen at the snapshot.
Vector matching_residual(const NonlinearSystem& sys, const Vector& v, double x_val,
                         double s_val, const Vector& u) {
    Vector r = sys.f(v * x_val, u);
    if (s_val != 0.0) r -= sys.E ? Vector(*sys.E * (s_val * v)) : Vector(s_val * v);
    return r;
}

Matrix matching_jacobian(const NonlinearSystem& sys, const Vector& v, double x_val,
                         double s_val, const Vector& u) {
    Matrix J = sys.jac_f(v * x_val, u) * x_val;
    if (s_val != 0.0) {
        if (sys.E)
            J -= s_val * *sys.E;
        else
            J.diagonal().array() -= s_val;
    }
    return J;
}

struct SnapshotTask {
    Index generator = 0;
    Index snapshot = 0;
    double time = 0.0;  // NaN for time-independent (equilibrium) solves
    double x_val = 0.0;
    double s_val = 0.0;
    Vector u;
    bool check_degenerate = false; // only nonlinear generators can degenerate
};

struct ColumnResult {
    NlmmColumnRecord record;
    Vector v;
};

SnapshotTask frozen_task(const SignalGenerator& gen, Index gen_index,
                         Index snapshot, double time, double x_val) {
    SnapshotTask task;
    task.generator = gen_index;
    task.snapshot = snapshot;
    task.time = time;
    task.x_val = x_val;
    if (const auto* lg = std::get_if<LinearGenerator>(&gen)) {
        task.s_val = lg->sigma * task.x_val;
        task.u = lg->r_dir * task.x_val;
    } else {
        const auto& ng = std::get<NonlinearGenerator>(gen);
        task.s_val = ng.s_v(task.x_val);
        task.u = ng.r(task.x_val);
        task.check_degenerate = true;
    }
    return task;
}

// Generator state at an off-grid time, used for continuation bridging.
double generator_state_at(const SignalGenerator& gen, double time) {
    if (const auto* lg = std::get_if<LinearGenerator>(&gen))
        return lg->x0 * std::exp(lg->sigma * time);
    const auto& ng = std::get<NonlinearGenerator>(gen);
    if (ng.solution) return (*ng.solution)(time);
    return integrate_generator(gen, CollocationGrid({time})).front();
}

std::vector<SnapshotTask> make_tasks(const SignalGenerator& gen, Index gen_index,
                                     const CollocationGrid& grid) {
    std::vector<SnapshotTask> tasks;
    if (const auto* zg = std::get_if<ZeroGenerator>(&gen)) {
        // Constant excitation: the matching condition has no time dependence,
        // one solve covers the whole grid.
        SnapshotTask task;
        task.generator = gen_index;
        task.snapshot = 0;
        task.time = std::numeric_limits<double>::quiet_NaN();
        task.x_val = zg->x0;
        task.s_val = 0.0;
        task.u = zg->r_dir * zg->x0;
        tasks.push_back(std::move(task));
        return tasks;
    }

    const std::vector<double> states = integrate_generator(gen, grid);
    for (std::size_t k = 0; k < states.size(); ++k)
        tasks.push_back(frozen_task(gen, gen_index, static_cast<Index>(k),
                                    grid.times[k], states[k]));
    return tasks;
}

// Resolvent warm start generalized to a frozen snapshot: solving the
// linearized matching condition (s* E - x* A) v = B u* reduces to the
// classical (sigma E - A)^{-1} B r for exponential generators and stays
// well defined as the generator state crosses zero.
std::optional<Vector> snapshot_guess(const LinearSystem& lin, const SnapshotTask& task) {
    Eigen::FullPivLU<Matrix> lu(task.s_val * lin.E - task.x_val * lin.A);
    if (!lu.isInvertible()) return std::nullopt;
    return Vector(lu.solve(lin.B * task.u));
}

ColumnResult solve_column(const NonlinearSystem& sys, const SnapshotTask& task,
                          const NlmmOptions& opts, InitialGuessPolicy policy,
                          const std::optional<Vector>& previous) {
    ColumnResult result;
    result.record.generator = task.generator;
    result.record.snapshot = task.snapshot;
    result.record.time = task.time;
    result.record.x_val = task.x_val;

    // A vanished generator derivative at a nonzero state strips the v-term
    // from the matching condition; the solve is no longer anchored, so the
    // column is flagged and skipped. Constant and exponential generators are
    // exempt: s = 0 is then structural, not accidental.
    if (task.check_degenerate && task.s_val == 0.0 && task.x_val != 0.0) {
        result.record.skipped_degenerate = true;
        return result;
    }

    Vector guess = Vector::Zero(sys.n);
    switch (policy) {
    case InitialGuessPolicy::Zeros:
        break;
    case InitialGuessPolicy::Linearized:
        if (sys.linearization) {
            if (auto g = snapshot_guess(*sys.linearization, task))
                guess = std::move(*g);
            else if (previous)
                guess = *previous;
        } else if (previous) {
            guess = *previous;
        }
        break;
    case InitialGuessPolicy::PreviousNeighbor:
        if (previous) guess = *previous;
        break;
    case InitialGuessPolicy::Auto:
        break; // resolved before dispatch
    }

    NewtonOptions newton;
    newton.tol = opts.newton_tol;
    newton.max_iter = opts.newton_max_iter;
    newton.line_search = opts.line_search;
    const NewtonResult solve = newton_solve(
        [&](const Vector& v) { return matching_residual(sys, v, task.x_val, task.s_val, task.u); },
        [&](const Vector& v) { return matching_jacobian(sys, v, task.x_val, task.s_val, task.u); },
        std::move(guess), newton);

    result.record.iterations = solve.iterations;
    result.record.residual = solve.residual_norm;
    result.record.converged = solve.converged;
    if (solve.converged) result.v = solve.x;
    return result;
}

// March from a converged anchor towards the failed snapshot, halving the time
// step whenever an intermediate solve fails. Solutions of the intermediate
// matching conditions serve as warm starts only; the returned result belongs
// to the target snapshot. Gives up once the step underflows or the solve
// budget is spent (the target may sit past a fold of the solution branch,
// where no nearby root exists).
ColumnResult bridge_to_task(const NonlinearSystem& sys, const SignalGenerator& gen,
                            const SnapshotTask& target, const NlmmOptions& opts,
                            double anchor_time, const Vector& anchor_v,
                            ColumnResult fallback, bool start_halved) {
    const double span = target.time - anchor_time;
    double t_at = anchor_time;
    double step = start_halved ? 0.5 * span : span;
    Vector v_at = anchor_v;
    int solves = 0;
    const int budget = 24;
    while (solves < budget) {
        const double t_try = std::min(t_at + step, target.time);
        const bool is_target = t_try == target.time;
        const SnapshotTask task =
            is_target ? target
                      : frozen_task(gen, target.generator, target.snapshot, t_try,
                                    generator_state_at(gen, t_try));
        ColumnResult attempt = solve_column(sys, task, opts,
                                            InitialGuessPolicy::PreviousNeighbor, v_at);
        ++solves;
        if (attempt.record.converged) {
            if (is_target) {
                attempt.record.bridge_solves = solves;
                return attempt;
            }
            t_at = t_try;
            v_at = std::move(attempt.v);
            step = target.time - t_at;
        } else {
            step *= 0.5;
            if (step < span / 64.0) break;
        }
    }
    fallback.record.bridge_solves = solves;
    return fallback;
}

std::vector<ColumnResult> solve_generator(const NonlinearSystem& sys,
                                          const SignalGenerator& gen,
                                          const std::vector<SnapshotTask>& tasks,
                                          const NlmmOptions& opts,
                                          InitialGuessPolicy policy) {
    std::vector<ColumnResult> results;
    results.reserve(tasks.size());
    std::optional<Vector> previous;
    double previous_time = std::numeric_limits<double>::quiet_NaN();
    for (const SnapshotTask& task : tasks) {
        ColumnResult result = solve_column(sys, task, opts, policy, previous);
        if (!result.record.converged && !result.record.skipped_degenerate &&
            opts.continuation_fallback && previous && std::isfinite(previous_time) &&
            std::isfinite(task.time) && task.time > previous_time) {
            // A full-span retry duplicates the failed attempt whenever that
            // attempt was already warm-started from the anchor solution.
            const bool repeat = policy == InitialGuessPolicy::PreviousNeighbor;
            result = bridge_to_task(sys, gen, task, opts, previous_time, *previous,
                                    std::move(result), repeat);
        }
        if (!result.record.converged && !result.record.skipped_degenerate &&
            opts.undamped_rescue && opts.line_search) {
            NlmmOptions retry = opts;
            retry.line_search = false;
            ColumnResult second = solve_column(sys, task, retry, policy, previous);
            if (second.record.converged) {
                second.record.undamped_retry = true;
                second.record.bridge_solves = result.record.bridge_solves;
                result = std::move(second);
            }
        }
        if (result.record.converged) {
            previous = result.v;
            previous_time = task.time;
        }
        results.push_back(std::move(result));
    }
    return results;
}

} // namespace

void NlmmOptions::validate() const {
    if (!(newton_tol > 0.0))
        throw std::invalid_argument("NlmmOptions: newton_tol must be > 0");
    if (newton_max_iter < 1)
        throw std::invalid_argument("NlmmOptions: newton_max_iter must be >= 1");
    if (threads < 1) throw std::invalid_argument("NlmmOptions: threads must be >= 1");
    if (r_defl && sv_tol)
        throw std::invalid_argument("NlmmOptions: choose r_defl or sv_tol, not both");
    if (r_defl && *r_defl < 1)
        throw std::invalid_argument("NlmmOptions: r_defl must be >= 1");
    if (sv_tol && (!(*sv_tol > 0.0) || *sv_tol >= 1.0))
        throw std::invalid_argument("NlmmOptions: sv_tol must lie in (0, 1)");
}

bool NlmmReport::any_dropped() const {
    for (const NlmmColumnRecord& record : columns)
        if (!record.converged || record.dropped_dependent) return true;
    return false;
}

std::string NlmmReport::summary() const {
    std::ostringstream out;
    out << "columns attempted " << columns_attempted << ", retained "
        << columns_retained << ", basis order " << deflated_order;
    if (truncated_to_rank) out << " (request truncated to numerical rank)";
    out << "\n";
    for (const NlmmColumnRecord& record : columns) {
        if (record.converged && !record.dropped_dependent && record.bridge_solves == 0 &&
            !record.undamped_retry)
            continue;
        out << "  generator " << record.generator << ", snapshot " << record.snapshot;
        if (record.skipped_degenerate)
            out << ": skipped, generator dynamics vanish at state " << record.x_val;
        else if (!record.converged)
            out << ": no convergence in " << record.iterations
                << " iterations (residual " << record.residual << ")";
        else if (record.dropped_dependent)
            out << ": dropped as numerically dependent";
        else if (record.undamped_retry)
            out << ": recovered without step damping";
        else
            out << ": recovered";
        if (record.bridge_solves > 0)
            out << " (" << record.bridge_solves << " continuation solves)";
        out << "\n";
    }
    if (singular_values.size() > 0)
        out << "  singular values " << singular_values(0) << " .. "
            << singular_values(singular_values.size() - 1) << "\n";
    return out.str();
}

Vector residual_nsg(const NonlinearSystem& sys, const NonlinearGenerator& gen,
                    double x_val, const Vector& v) {
    return matching_residual(sys, v, x_val, gen.s_v(x_val), gen.r(x_val));
}

Matrix jacobian_nsg(const NonlinearSystem& sys, const NonlinearGenerator& gen,
                    double x_val, const Vector& v) {
    return matching_jacobian(sys, v, x_val, gen.s_v(x_val), gen.r(x_val));
}

Vector residual_zsg(const NonlinearSystem& sys, const ZeroGenerator& gen,
                    const Vector& v) {
    return matching_residual(sys, v, gen.x0, 0.0, gen.r_dir * gen.x0);
}

Matrix jacobian_zsg(const NonlinearSystem& sys, const ZeroGenerator& gen,
                    const Vector& v) {
    return matching_jacobian(sys, v, gen.x0, 0.0, gen.r_dir * gen.x0);
}

Vector initial_guess_linearized(const LinearSystem& lin, double sigma,
                                const Vector& r_dir) {
    if (r_dir.size() != lin.m)
        throw std::invalid_argument("initial_guess_linearized: r_dir length != inputs");
    Eigen::FullPivLU<Matrix> lu(sigma * lin.E - lin.A);
    if (!lu.isInvertible())
        throw std::runtime_error("initial_guess_linearized: resolvent singular at shift");
    return lu.solve(lin.B * r_dir);
}

NlmmOutcome nlmm_basis(const NonlinearSystem& sys,
                       const std::vector<SignalGenerator>& gens,
                       const CollocationGrid& grid, const NlmmOptions& opts) {
    opts.validate();
    if (!sys.f || !sys.jac_f)
        throw std::invalid_argument("nlmm_basis: f and jac_f are required");
    if (gens.empty()) throw std::invalid_argument("nlmm_basis: no generators");
    if (grid.times.empty()) throw std::invalid_argument("nlmm_basis: empty grid");
    for (const SignalGenerator& gen : gens) validate_generator(gen, sys.m);

    InitialGuessPolicy policy = opts.initial_guess_policy;
    if (policy == InitialGuessPolicy::Auto)
        policy = sys.linearization ? InitialGuessPolicy::Linearized
                                   : InitialGuessPolicy::PreviousNeighbor;

    std::vector<std::vector<SnapshotTask>> task_groups;
    task_groups.reserve(gens.size());
    for (std::size_t i = 0; i < gens.size(); ++i)
        task_groups.push_back(make_tasks(gens[i], static_cast<Index>(i), grid));

    // Snapshots of one generator chain through their warm starts, so the unit
    // of concurrency is the generator. Results are merged in generator order
    // either way, keeping the outcome independent of scheduling.
    std::vector<std::vector<ColumnResult>> grouped(task_groups.size());
    const bool parallel =
        opts.threads > 1 && !opts.orthogonalize_inline && task_groups.size() > 1;
    if (parallel) {
        std::vector<std::future<std::vector<ColumnResult>>> futures;
        futures.reserve(task_groups.size());
        for (std::size_t i = 0; i < task_groups.size(); ++i)
            futures.push_back(std::async(
                std::launch::async, [&sys, &gen = gens[i], &tasks = task_groups[i],
                                     &opts, policy] {
                    return solve_generator(sys, gen, tasks, opts, policy);
                }));
        for (std::size_t i = 0; i < futures.size(); ++i) grouped[i] = futures[i].get();
    } else {
        for (std::size_t i = 0; i < task_groups.size(); ++i)
            grouped[i] = solve_generator(sys, gens[i], task_groups[i], opts, policy);
    }

    NlmmReport report;
    std::vector<BasisColumnInfo> provenance;
    Matrix collected(sys.n, 0);
    Index kept = 0;
    for (auto& group : grouped) {
        for (ColumnResult& result : group) {
            ++report.columns_attempted;
            const bool usable = result.record.converged;
            if (usable) {
                collected.conservativeResize(Eigen::NoChange, kept + 1);
                collected.col(kept) = result.v;
                bool retained = true;
                if (opts.orthogonalize_inline)
                    retained = gram_schmidt_append(collected, kept);
                if (retained) {
                    ++kept;
                    const auto gi = static_cast<std::size_t>(result.record.generator);
                    provenance.push_back(
                        {describe_generator(gens[gi]), result.record.time});
                } else {
                    result.record.dropped_dependent = true;
                }
            }
            report.columns.push_back(result.record);
        }
    }
    collected.conservativeResize(Eigen::NoChange, kept);
    report.columns_retained = kept;
    if (kept == 0)
        throw std::runtime_error(
            "nlmm_basis: no usable columns (all solves failed or were skipped)");

    // Final SVD screen. Without an explicit deflation request the collection
    // is still passed through at full numerical rank, which orthonormalizes
    // the raw columns while preserving their span.
    DeflationResult defl = opts.r_defl ? svd_deflate(collected, *opts.r_defl)
                          : opts.sv_tol
                              ? svd_deflate_tol(collected, *opts.sv_tol)
                              : svd_deflate(collected, collected.cols());
    if (opts.r_defl) report.truncated_to_rank = defl.truncated_to_rank;
    report.singular_values = defl.singular_values;
    report.deflated_order = defl.retained;

    NlmmOutcome outcome;
    outcome.basis = ReducedBasis(std::move(defl.V), BasisMethod::Nlmm,
                                 std::move(provenance));
    outcome.report = std::move(report);
    return outcome;
}

} // namespace mor
