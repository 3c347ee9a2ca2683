#pragma once

#include "mor/generators.hpp"
#include "mor/systems.hpp"
#include "mor/types.hpp"

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mor {

// States/outputs sampled on the uniform grid t_k = k h, k = 0..N.
struct Trajectory {
    double step = 0.0;
    std::vector<double> times;
    std::vector<Vector> states;
    std::vector<Vector> outputs;

    Index samples() const { return static_cast<Index>(times.size()); }
};

struct IntegrationError : std::runtime_error {
    std::size_t step_index;
    IntegrationError(const std::string& what, std::size_t step_index_)
        : std::runtime_error(what), step_index(step_index_) {}
};

// Implicit (backward) Euler with a full Newton solve of
//   x_{k+1} - x_k - h f(x_{k+1}, u(t_{k+1})) = 0
// per step, Jacobian I - h jac_f, previous state as the initial guess,
// tolerance 1e-10. Unconditionally stable on dissipative problems, first
// order accurate. Throws IntegrationError when the inner Newton fails or the
// state grows past the blow-up guard (|x|_inf > 1e12).
Trajectory implicit_euler(const NonlinearSystem& sys,
                          const std::function<Vector(double)>& u_of_t,
                          const Vector& x0, double h, double t_end);

// Number of implicit_euler runs since the last reset. Lets callers audit
// that a reduction pipeline was simulation-free (or used exactly the
// simulations it claims, like one POD training run).
std::uint64_t integration_run_count();
void reset_integration_run_count();

// Tabulates the scalar generator state x_v at the grid times by implicit
// Euler on x_v' = s_v(x_v) from t = 0, substep no larger than a tenth of the
// smallest grid gap (and than substep_cap, which keeps the first-order error
// of rapidly growing generators below the fitting noise). An attached
// closed-form solution is evaluated directly instead. Throws on blow-up.
std::vector<double> integrate_generator(const SignalGenerator& gen,
                                        const CollocationGrid& grid,
                                        double substep_cap = 1e-5);

// Largest |y - y_r|_inf over a shared implicit-Euler grid for a full model
// and a reduced model excited by the superposition of the given generators,
// with matched initial conditions x_0 = V xr0 and x_r(0) = xr0 where
// xr0 stacks the generator initial states. Small values certify the
// steady-state (moment matching) interpretation of the projection basis.
double steady_state_match_check(const NonlinearSystem& fom,
                                const NonlinearSystem& rom,
                                const Matrix& V,
                                const std::vector<SignalGenerator>& gens,
                                double t_end, double h);

// Convenience overload projecting the linear pair through from_linear.
double steady_state_match_check(const LinearSystem& fom,
                                const LinearSystem& rom,
                                const Matrix& V,
                                const std::vector<SignalGenerator>& gens,
                                double t_end, double h);

// Summed generator input u(t) = sum_i u_i(t); the excitation the steady-state
// matching check drives both models with.
Vector superposed_input(const std::vector<SignalGenerator>& gens, double t);

enum class TrajectoryColumns { States, Outputs };

// CSV export (header t,x1,..,xn or t,y1,..,yp; 17 significant digits; LF
// line endings) and the matching import. Import fills `states` regardless of
// which columns were written, so offline snapshot reuse reads back exports.
void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          TrajectoryColumns columns);
Trajectory read_trajectory_csv(const std::string& path);

} // namespace mor
