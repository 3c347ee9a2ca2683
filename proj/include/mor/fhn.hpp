#pragma once

#include "mor/generators.hpp"
#include "mor/integration.hpp"
#include "mor/systems.hpp"
#include "mor/types.hpp"

namespace mor {

// FitzHugh-Nagumo reaction-diffusion benchmark on [0, length]:
//
//   eps v_t = eps^2 v_zz + v(v - 0.1)(1 - v) - w + g
//   w_t     = b v - gamma w + g
//
// with zero-flux boundaries except a current stimulus i0(t) entering at the
// left end, discretized by cell-centered finite differences on `ell` cells.
// The state stacks [v; w] (n = 2 ell), the input is u = [i0(t); 1] (the
// second channel carries the constant source g), the output taps [v; w] at
// the left boundary cell. All coefficients live here as configuration.
struct FhnParams {
    Index ell = 100;
    double length = 1.0;
    double epsilon = 0.015;
    double b = 0.5;
    double gamma = 2.0;
    double g = 0.05;

    Index n() const { return 2 * ell; }
};

// Kinetics nonlinearity and its derivative, v(v - 0.1)(1 - v).
double fhn_cubic(double v);
double fhn_cubic_deriv(double v);

// Matrices of the semi-discrete descriptor form E x' = A x + f~(x) + B u
// before the diagonal E is folded into the right-hand side.
struct FhnAssembly {
    Vector E_diag;
    Matrix A;
    Matrix B;
    Matrix C;
};

FhnAssembly build_fhn_assembly(const FhnParams& params);

// Explicit-form model (E already folded in) with analytic Jacobian, output
// map, and the linearization about the origin attached for initial guesses.
NonlinearSystem build_fhn(const FhnParams& params);

// Stimulus i0(t) = 5e4 t^3 exp(-15 t) paired with the constant source
// channel: u(t) = [i0(t); 1].
Vector fhn_test_input(double t);

// Affine training generator x_v' = x_v + 0.3, x_v(0) = -0.29, u = [x_v; 1].
// Its closed form x_v(t) = e^t (x_v(0) + 0.3) - 0.3 is attached, so basis
// construction never integrates it; over [0, 5] it sweeps the excitation
// range [-0.29, 1.18].
SignalGenerator fhn_training_generator();

// Output-error metric: sum of |y - y_r| h over all samples and channels
// divided by the same sum of |y|. With per_channel_max the ratio is formed
// per output channel and the worst channel is reported. Grids must agree.
double relative_l1_error(const Trajectory& reference, const Trajectory& reduced,
                         bool per_channel_max = false);

} // namespace mor
