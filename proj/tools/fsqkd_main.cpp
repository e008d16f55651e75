// Command-line front end: scenario config in, CSV tables and run manifests out.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fsqkd/cli.hpp"
#include "fsqkd/version.hpp"

namespace {

void add_common(CLI::App* cmd, fsqkd::cli::Options& opt, bool out_required) {
    cmd->add_option("config", opt.config_path, "Scenario config file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    auto* out = cmd->add_option("-o,--out", opt.out_path,
                                "Output CSV path (a .manifest.json is written alongside)");
    if (out_required) out->required();
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&opt](const std::uint64_t& v) { opt.seed = v; },
        "Override the master seed");
    cmd->add_option_function<std::uint64_t>(
        "--slots", [&opt](const std::uint64_t& v) { opt.slots = v; },
        "Override the Monte Carlo slot window");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Free-space B92 quantum-key-distribution link simulator"};
    app.set_version_flag("--version", std::string("fsqkd ") + fsqkd::kVersion);
    app.require_subcommand(1);

    fsqkd::cli::Options plan_opt, interrupt_opt, track_opt, run_opt, sweep_opt;

    auto* plan = app.add_subcommand("plan", "Compensation-strategy report per cn2 regime");
    add_common(plan, plan_opt, false);
    plan->add_flag("--analytic-only", plan_opt.analytic_only,
                   "Accepted for symmetry; plan is always analytic");

    auto* interrupt =
        app.add_subcommand("interrupt", "Interruption fraction over a distance grid");
    add_common(interrupt, interrupt_opt, true);
    interrupt->add_flag("--analytic-only", interrupt_opt.analytic_only,
                        "Accepted for symmetry; interrupt is always analytic");

    auto* track = app.add_subcommand("track", "Closed-loop tracking time series");
    add_common(track, track_opt, true);

    auto* run = app.add_subcommand("run", "Single end-to-end scenario run");
    add_common(run, run_opt, true);

    auto* sweep = app.add_subcommand("sweep", "Parameter sweep");
    add_common(sweep, sweep_opt, true);
    sweep->add_flag("--analytic-only", sweep_opt.analytic_only,
                    "Skip the Monte Carlo; emit turbulence/ratio columns");
    sweep->add_option("--parallelism", sweep_opt.parallelism,
                      "Worker threads for sweep rows (0 = hardware)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        // CLI11 returns 0 for --help/--version; anything else is a usage error.
        return code == 0 ? fsqkd::cli::kExitOk : fsqkd::cli::kExitConfigError;
    }

    if (plan->parsed()) return fsqkd::cli::cmd_plan(plan_opt, std::cout, std::cerr);
    if (interrupt->parsed()) return fsqkd::cli::cmd_interrupt(interrupt_opt, std::cout, std::cerr);
    if (track->parsed()) return fsqkd::cli::cmd_track(track_opt, std::cout, std::cerr);
    if (run->parsed()) return fsqkd::cli::cmd_run(run_opt, std::cout, std::cerr);
    if (sweep->parsed()) return fsqkd::cli::cmd_sweep(sweep_opt, std::cout, std::cerr);
    return fsqkd::cli::kExitConfigError;
}
