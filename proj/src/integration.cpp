#include "mor/integration.hpp"

#include "mor/newton.hpp"

#include <Eigen/LU>
#include <Eigen/QR>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mor {

namespace {

std::atomic<std::uint64_t> integration_runs{0};

constexpr double blow_up_guard = 1e12;

std::string csv_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

} // namespace

std::uint64_t integration_run_count() { return integration_runs.load(); }
void reset_integration_run_count() { integration_runs.store(0); }

Trajectory implicit_euler(const NonlinearSystem& sys,
                          const std::function<Vector(double)>& u_of_t,
                          const Vector& x0, double h, double t_end) {
    if (!sys.f) throw std::invalid_argument("implicit_euler: system has no f");
    if (sys.E)
        throw std::invalid_argument("implicit_euler: fold the descriptor mass "
                                    "matrix into f before integrating");
    if (x0.size() != sys.n)
        throw std::invalid_argument("implicit_euler: x0 length != n");
    if (!(h > 0.0)) throw std::invalid_argument("implicit_euler: h must be > 0");
    const auto steps = static_cast<std::size_t>(std::llround(t_end / h));
    if (steps < 1) throw std::invalid_argument("implicit_euler: horizon shorter than one step");

    integration_runs.fetch_add(1);

    Trajectory traj;
    traj.step = h;
    traj.times.reserve(steps + 1);
    traj.states.reserve(steps + 1);
    traj.times.push_back(0.0);
    traj.states.push_back(x0);
    if (sys.h) traj.outputs.push_back(sys.h(x0));

    const Matrix identity = Matrix::Identity(sys.n, sys.n);
    NewtonOptions newton;
    newton.tol = 1e-10;
    newton.max_iter = 30;

    Vector x = x0;
    for (std::size_t k = 1; k <= steps; ++k) {
        const double t = static_cast<double>(k) * h;
        const Vector u = u_of_t(t);
        const Vector x_prev = x;
        // Backward Euler stage equation, solved by full Newton from the
        // previous state.
        auto stage = [&](const Vector& z) -> Vector {
            return z - x_prev - h * sys.f(z, u);
        };
        auto stage_jac = [&](const Vector& z) -> Matrix {
            return identity - h * sys.jac_f(z, u);
        };
        const NewtonResult solve = newton_solve(stage, stage_jac, x_prev, newton);
        if (!solve.converged)
            throw IntegrationError("implicit_euler: stage solve failed at step "
                                       + std::to_string(k),
                                   k);
        x = solve.x;
        if (x.lpNorm<Eigen::Infinity>() > blow_up_guard)
            throw IntegrationError("implicit_euler: state blow-up at step "
                                       + std::to_string(k),
                                   k);
        traj.times.push_back(t);
        traj.states.push_back(x);
        if (sys.h) traj.outputs.push_back(sys.h(x));
    }
    return traj;
}

std::vector<double> integrate_generator(const SignalGenerator& gen,
                                        const CollocationGrid& grid,
                                        double substep_cap) {
    std::vector<double> values;
    values.reserve(grid.times.size());

    // Closed-form variants (and tabulated nonlinear ones) skip integration.
    const auto* nlg = std::get_if<NonlinearGenerator>(&gen);
    if (!nlg || nlg->solution) {
        for (double t : grid.times) values.push_back(eval_generator(gen, t).x);
        return values;
    }

    if (grid.times.front() < 0.0)
        throw std::invalid_argument(
            "integrate_generator: collocation before the generator start t = 0");
    if (!(substep_cap > 0.0))
        throw std::invalid_argument("integrate_generator: substep cap must be > 0");

    // Backward Euler on the scalar generator dynamics. The substep stays a
    // decade under the grid spacing and under the cap; the cap matters for
    // rapidly growing generators whose first-order error would otherwise
    // swamp collocation-level accuracy.
    const double h_gen = std::min(grid.min_spacing() / 10.0, substep_cap);
    double t_cur = 0.0;
    double x = nlg->x0;
    std::size_t guard_step = 0;
    for (double target : grid.times) {
        if (target > t_cur) {
            const auto substeps =
                static_cast<std::size_t>(std::ceil((target - t_cur) / h_gen));
            const double h_step = (target - t_cur) / static_cast<double>(substeps);
            for (std::size_t s = 0; s < substeps; ++s) {
                const double x_prev = x;
                double z = x_prev;
                // Scalar Newton with a finite-difference slope of s_v.
                for (int iter = 0; iter < 50; ++iter) {
                    const double psi = z - x_prev - h_step * nlg->s_v(z);
                    if (std::abs(psi) <= 1e-13 * (1.0 + std::abs(z))) break;
                    const double delta = 1e-6 * (1.0 + std::abs(z));
                    const double slope =
                        (nlg->s_v(z + delta) - nlg->s_v(z - delta)) / (2.0 * delta);
                    const double dpsi = 1.0 - h_step * slope;
                    if (dpsi == 0.0 || !std::isfinite(dpsi))
                        throw IntegrationError(
                            "integrate_generator: singular stage derivative", guard_step);
                    z -= psi / dpsi;
                }
                x = z;
                ++guard_step;
                if (!std::isfinite(x) || std::abs(x) > blow_up_guard)
                    throw IntegrationError("integrate_generator: generator diverged near t = "
                                               + std::to_string(t_cur),
                                           guard_step);
            }
            t_cur = target;
        }
        values.push_back(x);
    }
    return values;
}

Vector superposed_input(const std::vector<SignalGenerator>& gens, double t) {
    if (gens.empty())
        throw std::invalid_argument("superposed_input: no generators");
    Vector u = eval_generator(gens.front(), t).u;
    for (std::size_t i = 1; i < gens.size(); ++i) {
        const Vector ui = eval_generator(gens[i], t).u;
        if (ui.size() != u.size())
            throw std::invalid_argument("superposed_input: input dimensions differ");
        u += ui;
    }
    return u;
}

double steady_state_match_check(const NonlinearSystem& fom,
                                const NonlinearSystem& rom,
                                const Matrix& V,
                                const std::vector<SignalGenerator>& gens,
                                double t_end, double h) {
    if (V.rows() != fom.n || V.cols() != rom.n)
        throw std::invalid_argument("steady_state_match_check: V must map rom to fom states");
    if (static_cast<Index>(gens.size()) != V.cols())
        throw std::invalid_argument(
            "steady_state_match_check: need one generator per basis column");
    if (!fom.h || !rom.h)
        throw std::invalid_argument("steady_state_match_check: output maps required");

    // Matched start: the generator initial states give the reduced
    // coordinates, the full state is their lift.
    Vector xr0(V.cols());
    for (Index i = 0; i < V.cols(); ++i)
        xr0(i) = generator_x0(gens[static_cast<std::size_t>(i)]);
    const Vector x0 = V * xr0;

    auto input = [&gens](double t) { return superposed_input(gens, t); };
    const Trajectory full = implicit_euler(fom, input, x0, h, t_end);
    const Trajectory reduced = implicit_euler(rom, input, xr0, h, t_end);

    double worst = 0.0;
    for (std::size_t k = 0; k < full.outputs.size(); ++k)
        worst = std::max(worst,
                         (full.outputs[k] - reduced.outputs[k]).lpNorm<Eigen::Infinity>());
    return worst;
}

double steady_state_match_check(const LinearSystem& fom,
                                const LinearSystem& rom,
                                const Matrix& V,
                                const std::vector<SignalGenerator>& gens,
                                double t_end, double h) {
    return steady_state_match_check(from_linear(fom), from_linear(rom), V, gens,
                                    t_end, h);
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          TrajectoryColumns columns) {
    const std::vector<Vector>& data =
        columns == TrajectoryColumns::States ? traj.states : traj.outputs;
    if (data.empty())
        throw std::invalid_argument("write_trajectory_csv: trajectory has no such columns");

    std::ofstream out(path, std::ios::binary); // binary keeps LF endings
    if (!out) throw std::runtime_error("write_trajectory_csv: cannot open " + path);

    const char* prefix = columns == TrajectoryColumns::States ? "x" : "y";
    out << "t";
    for (Index i = 0; i < data.front().size(); ++i) out << "," << prefix << (i + 1);
    out << "\n";
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        out << csv_double(traj.times[k]);
        for (Index i = 0; i < data[k].size(); ++i) out << "," << csv_double(data[k](i));
        out << "\n";
    }
    if (!out) throw std::runtime_error("write_trajectory_csv: write failed for " + path);
}

Trajectory read_trajectory_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_trajectory_csv: cannot open " + path);

    std::string line;
    if (!std::getline(in, line) || line.rfind("t,", 0) != 0)
        throw std::runtime_error("read_trajectory_csv: missing t,... header in " + path);

    Trajectory traj;
    std::size_t expected = std::string::npos;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string cell;
        std::vector<double> values;
        while (std::getline(row, cell, ','))
            values.push_back(std::stod(cell));
        if (values.size() < 2)
            throw std::runtime_error("read_trajectory_csv: short row in " + path);
        if (expected == std::string::npos) expected = values.size();
        if (values.size() != expected)
            throw std::runtime_error("read_trajectory_csv: ragged rows in " + path);
        traj.times.push_back(values[0]);
        Vector state(static_cast<Index>(values.size()) - 1);
        for (std::size_t i = 1; i < values.size(); ++i)
            state(static_cast<Index>(i) - 1) = values[i];
        traj.states.push_back(std::move(state));
    }
    if (traj.times.size() >= 2) traj.step = traj.times[1] - traj.times[0];
    return traj;
}

} // namespace mor
