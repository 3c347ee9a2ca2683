#pragma once

#include "mor/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace mor {

// Scalar signal generator x_v' = s_v(x_v), u = r(x_v), x_v(0) = x0. One
// generator drives one family of basis columns; multi-column excitations are
// lists of these. The optional closed-form solution short-circuits numerical
// integration of the generator dynamics when it is known analytically.
struct NonlinearGenerator {
    std::function<double(double)> s_v;
    std::function<Vector(double)> r; // input map, scalar argument
    double x0 = 0.0;
    std::optional<std::function<double(double)>> solution; // x_v(t) if known
};

// Exponential generator x_v(t) = exp(sigma t) x0, u(t) = r_dir x_v(t).
struct LinearGenerator {
    double sigma = 0.0;
    Vector r_dir;
    double x0 = 0.0;
};

// Constant generator x_v(t) = x0, u(t) = r_dir x0. Encodes equilibrium
// (steady-state) matching; its solve needs no time discretization.
struct ZeroGenerator {
    Vector r_dir;
    double x0 = 0.0;
};

using SignalGenerator = std::variant<NonlinearGenerator, LinearGenerator, ZeroGenerator>;

// Throws std::invalid_argument unless x0 != 0 and dimensions are sane.
void validate_generator(const SignalGenerator& gen, Index expected_m);

// Soft checks (s_v(0) ~ 0, r(0) ~ 0 for the nonlinear variant). Violations
// are legitimate for affine generators, so they are reported, not thrown.
std::vector<std::string> generator_warnings(const SignalGenerator& gen);

double generator_x0(const SignalGenerator& gen);
Index generator_input_dim(const SignalGenerator& gen);
std::string describe_generator(const SignalGenerator& gen);

struct GeneratorSample {
    double x = 0.0; // generator state x_v(t)
    Vector u;       // driven input u(t)
};

// Evaluates the generator state and input at time t. Linear and Zero variants
// are closed-form; the Nonlinear variant requires an attached solution (use
// integrate_generator to tabulate states otherwise) and throws
// std::logic_error when queried without one.
GeneratorSample eval_generator(const SignalGenerator& gen, double t);

// Strictly increasing collocation times t*_1 < ... < t*_K, K >= 1.
struct CollocationGrid {
    std::vector<double> times;

    CollocationGrid() = default;
    explicit CollocationGrid(std::vector<double> times_);
    static CollocationGrid uniform(double t0, double t1, int count);

    Index size() const { return static_cast<Index>(times.size()); }
    double min_spacing() const; // smallest positive gap, including 0 -> t*_1
};

} // namespace mor
