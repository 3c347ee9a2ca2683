#pragma once

#include "mor/basis.hpp"
#include "mor/config.hpp"
#include "mor/systems.hpp"
#include "mor/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace mor {

// Exit code contract shared by every subcommand.
inline constexpr int exit_success = 0;
inline constexpr int exit_failure = 1;
inline constexpr int exit_partial = 2; // completed, but columns were dropped

struct CliOptions {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed; // overrides MOR_SEED, overrides default
    int threads = 1;
    bool verbose = false;
    bool perturb_basis = false;    // verify-only negative control
    bool error_per_channel = false; // compare: report worst channel instead
};

// Effective RNG seed: --seed if given, else the MOR_SEED environment
// variable, else a fixed default. The only environment variable the tool
// reads.
std::uint64_t effective_seed(const CliOptions& opts);

// Subcommand drivers. Log output goes to `log`; artifacts (bases, CSV
// tables, reports) are written under opts.out_dir. All catch their own
// errors and translate them into the exit code contract.
int run_reduce(const CliOptions& opts, std::ostream& log);
int run_simulate(const CliOptions& opts, std::ostream& log);
int run_compare(const CliOptions& opts, std::ostream& log);
int run_verify(const CliOptions& opts, std::ostream& log);

// One named cross-module consistency check, with the measured metric and the
// threshold it was held to.
struct VerifyCheck {
    std::string name;
    double metric = 0.0;
    double threshold = 0.0;
    bool passed = false;
};

// The checks run_verify executes: subspace equivalence between the nonlinear
// and rational Krylov constructions on a linear model, interpolation
// residuals, moment matching, matched-initialization output agreement,
// equilibrium consistency, snapshot reconstruction, and integrator order.
// perturb_basis injects a corrupted basis into the output-agreement check as
// a sensitivity control (the suite must then fail).
std::vector<VerifyCheck> verify_suite(std::uint64_t seed, bool perturb_basis = false);

// Dense random system with spectrum shifted into the open left half plane,
// entries drawn from the given generator. Shared by verification and tests.
LinearSystem random_stable_system(Index n, Index m, Index p, std::mt19937_64& rng);

// 17-significant-digit shortest-exact formatting used by every CSV writer.
std::string format_double(double value);

} // namespace mor
