#include "mor/generators.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mor {

namespace {

void require_nonzero_x0(double x0) {
    // x0 = 0 makes the excitation identically zero and every matching
    // condition degenerate, so it is a hard error for all variants.
    if (x0 == 0.0 || !std::isfinite(x0))
        throw std::invalid_argument("SignalGenerator: x0 must be nonzero and finite");
}

} // namespace

void validate_generator(const SignalGenerator& gen, Index expected_m) {
    std::visit(
        [expected_m](const auto& g) {
            using T = std::decay_t<decltype(g)>;
            require_nonzero_x0(g.x0);
            if constexpr (std::is_same_v<T, NonlinearGenerator>) {
                if (!g.s_v || !g.r)
                    throw std::invalid_argument("SignalGenerator: s_v and r are required");
                if (g.r(g.x0).size() != expected_m)
                    throw std::invalid_argument("SignalGenerator: r output length != inputs");
            } else {
                if (g.r_dir.size() != expected_m)
                    throw std::invalid_argument("SignalGenerator: r_dir length != inputs");
            }
        },
        gen);
}

std::vector<std::string> generator_warnings(const SignalGenerator& gen) {
    // s_v(0) != 0 or r(0) != 0 means the generator has no equilibrium at the
    // origin. Affine training signals do this on purpose, so it is worth a
    // notice but not a rejection.
    std::vector<std::string> warnings;
    if (const auto* g = std::get_if<NonlinearGenerator>(&gen)) {
        if (g->s_v && std::abs(g->s_v(0.0)) > 1e-12)
            warnings.push_back("generator dynamics s_v(0) != 0 (no equilibrium at origin)");
        if (g->r && g->r(0.0).lpNorm<Eigen::Infinity>() > 1e-12)
            warnings.push_back("generator input map r(0) != 0 (input offset at origin)");
    }
    return warnings;
}

double generator_x0(const SignalGenerator& gen) {
    return std::visit([](const auto& g) { return g.x0; }, gen);
}

Index generator_input_dim(const SignalGenerator& gen) {
    if (const auto* g = std::get_if<NonlinearGenerator>(&gen)) return g->r(g->x0).size();
    if (const auto* g = std::get_if<LinearGenerator>(&gen)) return g->r_dir.size();
    return std::get<ZeroGenerator>(gen).r_dir.size();
}

std::string describe_generator(const SignalGenerator& gen) {
    std::ostringstream out;
    if (const auto* g = std::get_if<NonlinearGenerator>(&gen)) {
        out << "nonlinear(x0=" << g->x0 << (g->solution ? ", closed form" : "") << ")";
    } else if (const auto* g = std::get_if<LinearGenerator>(&gen)) {
        out << "exponential(sigma=" << g->sigma << ", x0=" << g->x0 << ")";
    } else {
        out << "constant(x0=" << std::get<ZeroGenerator>(gen).x0 << ")";
    }
    return out.str();
}

GeneratorSample eval_generator(const SignalGenerator& gen, double t) {
    GeneratorSample sample;
    if (const auto* g = std::get_if<NonlinearGenerator>(&gen)) {
        if (!g->solution)
            throw std::logic_error(
                "eval_generator: nonlinear generator has no attached solution; "
                "tabulate it with integrate_generator first");
        sample.x = (*g->solution)(t);
        sample.u = g->r(sample.x);
    } else if (const auto* g = std::get_if<LinearGenerator>(&gen)) {
        sample.x = std::exp(g->sigma * t) * g->x0;
        sample.u = g->r_dir * sample.x;
    } else {
        const auto& g0 = std::get<ZeroGenerator>(gen);
        sample.x = g0.x0;
        sample.u = g0.r_dir * g0.x0;
    }
    return sample;
}

CollocationGrid::CollocationGrid(std::vector<double> times_) : times(std::move(times_)) {
    if (times.empty())
        throw std::invalid_argument("CollocationGrid: need at least one time");
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (!std::isfinite(times[k]))
            throw std::invalid_argument("CollocationGrid: times must be finite");
        if (k > 0 && times[k] <= times[k - 1])
            throw std::invalid_argument("CollocationGrid: times must be strictly increasing");
    }
}

CollocationGrid CollocationGrid::uniform(double t0, double t1, int count) {
    if (count < 1) throw std::invalid_argument("CollocationGrid: count must be >= 1");
    if (count == 1) return CollocationGrid({t0});
    if (t1 <= t0) throw std::invalid_argument("CollocationGrid: need t1 > t0");
    std::vector<double> times(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k)
        times[static_cast<std::size_t>(k)] = t0 + (t1 - t0) * k / (count - 1);
    return CollocationGrid(std::move(times));
}

double CollocationGrid::min_spacing() const {
    double spacing = std::numeric_limits<double>::infinity();
    double prev = 0.0; // integration of the generator starts at t = 0
    for (double t : times) {
        if (t > prev) spacing = std::min(spacing, t - prev);
        prev = t;
    }
    return spacing;
}

} // namespace mor
