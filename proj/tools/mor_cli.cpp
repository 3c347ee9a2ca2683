// Command-line front end for the reduction toolkit. Thin by design: all the
// work lives in the library so the subcommands stay testable without
// spawning processes.

#include "mor/harness.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Model order reduction toolkit"};
    app.require_subcommand(1);

    mor::CliOptions opts;

    auto add_common = [&opts](CLI::App* cmd, bool config_required) {
        auto* config = cmd->add_option("--config", opts.config_path,
                                       "Path to the run configuration");
        if (config_required) config->required();
        cmd->add_option("--out", opts.out_dir, "Output directory for artifacts");
        cmd->add_option("--seed", opts.seed, "RNG seed for randomized checks");
        cmd->add_option("--threads", opts.threads, "Worker threads for basis solves")
            ->check(CLI::PositiveNumber);
    };

    auto* reduce = app.add_subcommand("reduce", "Build a reduced basis");
    add_common(reduce, true);

    auto* simulate = app.add_subcommand("simulate", "Integrate the full model");
    add_common(simulate, true);
    simulate->alias("sim");

    auto* compare = app.add_subcommand("compare",
                                       "Reduce, re-simulate and report output errors");
    add_common(compare, true);
    compare->add_flag("--per-channel", opts.error_per_channel,
                      "Report the worst output channel instead of the summed error");

    auto* verify = app.add_subcommand("verify", "Run the cross-module consistency suite");
    add_common(verify, false);
    verify->add_flag("--verbose", opts.verbose, "Print metrics for passing checks too");
    verify->add_flag("--perturb-basis", opts.perturb_basis,
                     "Corrupt a basis on purpose (negative control, must fail)");

    CLI11_PARSE(app, argc, argv);

    if (reduce->parsed()) return mor::run_reduce(opts, std::cout);
    if (simulate->parsed()) return mor::run_simulate(opts, std::cout);
    if (compare->parsed()) return mor::run_compare(opts, std::cout);
    return mor::run_verify(opts, std::cout);
}
