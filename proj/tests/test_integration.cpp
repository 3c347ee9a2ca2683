#include "mor/integration.hpp"

#include "mor/linear_mm.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <stdexcept>

using namespace mor;

namespace {

NonlinearSystem scalar_decay() {
    return NonlinearSystem(
        1, 1, 1,
        [](const Vector& x, const Vector& u) -> Vector { return -x + u; },
        [](const Vector&, const Vector&) -> Matrix {
            return -Matrix::Identity(1, 1);
        },
        [](const Vector& x) -> Vector { return x; });
}

std::function<Vector(double)> zero_input(Index m) {
    return [m](double) { return Vector(Vector::Zero(m)); };
}

} // namespace

TEST_CASE("implicit Euler reproduces its exact discrete recurrences") {
    SUBCASE("linear decay follows x_k = x0 / (1 + h)^k") {
        Vector x0(1);
        x0 << 1.0;
        const Trajectory traj =
            implicit_euler(scalar_decay(), zero_input(1), x0, 0.1, 1.0);
        REQUIRE(traj.samples() == 11);
        CHECK(traj.states.front()(0) == 1.0);
        // Hand value of 1 / 1.1^10.
        CHECK(traj.states.back()(0)
              == doctest::Approx(0.3855432894295314).epsilon(1e-12));
        CHECK(traj.times.back() == doctest::Approx(1.0).epsilon(1e-14));
    }

    SUBCASE("constant forcing integrates exactly") {
        NonlinearSystem drift(
            1, 1, 1,
            [](const Vector&, const Vector&) -> Vector {
                return Vector::Constant(1, 0.7);
            },
            [](const Vector&, const Vector&) -> Matrix {
                return Matrix::Zero(1, 1);
            },
            [](const Vector& x) -> Vector { return x; });
        Vector x0(1);
        x0 << 0.2;
        const Trajectory traj = implicit_euler(drift, zero_input(1), x0, 0.25, 2.0);
        // x(t) = x0 + 0.7 t is linear, so even the first-order scheme is exact.
        CHECK(traj.states.back()(0) == doctest::Approx(0.2 + 0.7 * 2.0).epsilon(1e-12));
    }

    SUBCASE("outputs follow the output map along the trajectory") {
        NonlinearSystem sys = scalar_decay();
        sys.h = [](const Vector& x) -> Vector { return 3.0 * x; };
        Vector x0(1);
        x0 << 2.0;
        const Trajectory traj = implicit_euler(sys, zero_input(1), x0, 0.5, 1.0);
        for (Index k = 0; k < traj.samples(); ++k)
            CHECK(traj.outputs[static_cast<std::size_t>(k)](0)
                  == doctest::Approx(3.0 * traj.states[static_cast<std::size_t>(k)](0)));
    }
}

TEST_CASE("implicit Euler converges at first order") {
    Vector x0(1);
    x0 << 1.0;
    const double exact = std::exp(-1.0);
    auto terminal_error = [&](double h) {
        return std::abs(
            implicit_euler(scalar_decay(), zero_input(1), x0, h, 1.0).states.back()(0)
            - exact);
    };
    const double ratio = terminal_error(0.005) / terminal_error(0.01);
    CHECK(ratio > 0.4);
    CHECK(ratio < 0.6);
}

TEST_CASE("implicit Euler is unconditionally stable on dissipative dynamics") {
    SUBCASE("scalar decay contracts at every step size") {
        Vector x0(1);
        x0 << 1.0;
        for (double h : {0.1, 1.0, 10.0, 100.0}) {
            const Trajectory traj =
                implicit_euler(scalar_decay(), zero_input(1), x0, h, 10.0 * h);
            for (std::size_t k = 1; k < traj.states.size(); ++k) {
                CHECK(std::abs(traj.states[k](0)) <= std::abs(traj.states[k - 1](0)));
            }
        }
    }

    SUBCASE("a damped rotation never grows in norm") {
        // Eigenvalues -0.2 +/- 2i: large steps would blow up an explicit
        // scheme; the implicit step contracts for any h.
        Matrix A(2, 2);
        A << -0.2, 2.0, -2.0, -0.2;
        const NonlinearSystem sys(
            2, 1, 2,
            [A](const Vector& x, const Vector&) -> Vector { return A * x; },
            [A](const Vector&, const Vector&) -> Matrix { return A; },
            [](const Vector& x) -> Vector { return x; });
        Vector x0(2);
        x0 << 1.0, 0.0;
        const Trajectory traj = implicit_euler(sys, zero_input(1), x0, 1.0, 50.0);
        for (std::size_t k = 1; k < traj.states.size(); ++k) {
            CHECK(traj.states[k].norm() <= traj.states[k - 1].norm());
        }
    }
}

TEST_CASE("implicit Euler failure reporting") {
    // x' = x^2 with a large step: past the fold of the step equation the
    // inner solve has no real root and the integrator must say so.
    NonlinearSystem quad(
        1, 1, 1,
        [](const Vector& x, const Vector&) -> Vector {
            return Vector::Constant(1, x(0) * x(0));
        },
        [](const Vector& x, const Vector&) -> Matrix {
            return Matrix::Constant(1, 1, 2.0 * x(0));
        },
        [](const Vector& x) -> Vector { return x; });
    Vector x0(1);
    x0 << 2.0;
    CHECK_THROWS_AS(implicit_euler(quad, zero_input(1), x0, 0.5, 5.0),
                    IntegrationError);

    CHECK_THROWS_AS(implicit_euler(scalar_decay(), zero_input(1), x0, -0.1, 1.0),
                    std::invalid_argument);
}

TEST_CASE("integration run counter audits full-order solves") {
    reset_integration_run_count();
    CHECK(integration_run_count() == 0);
    Vector x0(1);
    x0 << 1.0;
    implicit_euler(scalar_decay(), zero_input(1), x0, 0.1, 0.5);
    implicit_euler(scalar_decay(), zero_input(1), x0, 0.1, 0.5);
    CHECK(integration_run_count() == 2);
    reset_integration_run_count();
    CHECK(integration_run_count() == 0);
}

TEST_CASE("integrate_generator tabulates generator states") {
    SUBCASE("exponential generators use the closed form") {
        const CollocationGrid grid({0.5, 1.0, 2.0});
        Vector dir(1);
        dir << 1.0;
        const auto states =
            integrate_generator(LinearGenerator{0.6, dir, 0.7}, grid);
        REQUIRE(states.size() == 3);
        for (std::size_t k = 0; k < 3; ++k)
            CHECK(states[k]
                  == doctest::Approx(0.7 * std::exp(0.6 * grid.times[k]))
                         .epsilon(1e-14));
    }

    SUBCASE("attached solutions bypass the substep march") {
        NonlinearGenerator gen;
        gen.s_v = [](double x) { return x + 0.3; };
        gen.r = [](double x) { return Vector::Constant(1, x); };
        gen.x0 = -0.29;
        gen.solution = [](double t) { return std::exp(t) * (-0.29 + 0.3) - 0.3; };
        const auto states = integrate_generator(gen, CollocationGrid({1.0, 5.0}));
        CHECK(states[0] == doctest::Approx(-0.27281718171540953).epsilon(1e-13));
        CHECK(states[1] == doctest::Approx(1.1841315910257660).epsilon(1e-13));
    }

    SUBCASE("numerical fallback reaches the closed form within first order") {
        NonlinearGenerator gen;
        gen.s_v = [](double x) { return -x; };
        gen.r = [](double x) { return Vector::Constant(1, x); };
        gen.x0 = 1.0;
        const auto states = integrate_generator(gen, CollocationGrid({1.0}));
        CHECK(states[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-5));
    }
}

TEST_CASE("superposed_input sums the generator excitations") {
    Vector d1(2), d2(2);
    d1 << 1.0, 0.0;
    d2 << 0.0, 2.0;
    const std::vector<SignalGenerator> gens = {LinearGenerator{0.5, d1, 1.0},
                                               ZeroGenerator{d2, 0.25}};
    const Vector u = superposed_input(gens, 0.8);
    CHECK(u(0) == doctest::Approx(std::exp(0.4)).epsilon(1e-14));
    CHECK(u(1) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("steady_state_match_check is exact for an identity reduction") {
    // With V = I the reduced model is the full model; both trajectories are
    // the same discrete recursion, so the deviation vanishes identically.
    const LinearSystem lin(Matrix::Constant(1, 1, -1.0), Matrix::Ones(1, 1),
                           Matrix::Ones(1, 1));
    const Matrix V = Matrix::Identity(1, 1);
    Vector dir(1);
    dir << 1.0;
    const std::vector<SignalGenerator> gens = {LinearGenerator{-0.3, dir, 0.5}};
    const LinearSystem rom = reduce_linear(lin, V);
    CHECK(steady_state_match_check(lin, rom, V, gens, 2.0, 1e-2) < 1e-14);
}

TEST_CASE("steady_state_match_check validates its wiring") {
    const LinearSystem lin(Matrix::Constant(1, 1, -1.0), Matrix::Ones(1, 1),
                           Matrix::Ones(1, 1));
    const LinearSystem rom = reduce_linear(lin, Matrix::Identity(1, 1));
    Vector dir(1);
    dir << 1.0;
    // One generator per basis column is required.
    CHECK_THROWS_AS(steady_state_match_check(lin, rom, Matrix::Identity(1, 1),
                                             {LinearGenerator{-0.3, dir, 0.5},
                                              LinearGenerator{-0.4, dir, 0.5}},
                                             1.0, 1e-2),
                    std::invalid_argument);
}

TEST_CASE("trajectory CSV round trip") {
    Vector x0(1);
    x0 << 1.0;
    const Trajectory traj =
        implicit_euler(scalar_decay(), zero_input(1), x0, 0.125, 1.0);

    const std::string path = "trajectory_roundtrip.csv";
    write_trajectory_csv(path, traj, TrajectoryColumns::States);
    const Trajectory back = read_trajectory_csv(path);
    std::remove(path.c_str());

    REQUIRE(back.samples() == traj.samples());
    CHECK(back.step == traj.step);
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        CHECK(back.times[k] == traj.times[k]);
        CHECK(back.states[k](0) == traj.states[k](0));
    }

    CHECK_THROWS_AS(read_trajectory_csv("missing_trajectory.csv"),
                    std::runtime_error);
}
