#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace fsqkd::cli {

/// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntimeError = 1; // model/domain/runtime failures
inline constexpr int kExitConfigError = 2;  // schema or file problems

struct Options {
    std::string config_path;
    std::string out_path;                // CSV destination ("" = stdout report only)
    std::optional<std::uint64_t> seed;   // overrides master_seed
    std::optional<std::uint64_t> slots;  // overrides the Monte Carlo window
    bool analytic_only = false;
    unsigned parallelism = 0;            // 0 = hardware concurrency
};

/// Compensation-strategy report per configured cn2 regime.
int cmd_plan(const Options& opt, std::ostream& out, std::ostream& err);

/// Interruption-fraction table over a distance grid, one column per cn2.
int cmd_interrupt(const Options& opt, std::ostream& out, std::ostream& err);

/// Closed-loop tracking time series plus summary.
int cmd_track(const Options& opt, std::ostream& out, std::ostream& err);

/// Single end-to-end scenario run.
int cmd_run(const Options& opt, std::ostream& out, std::ostream& err);

/// Parameter sweep (Monte Carlo, or analytic-only columns).
int cmd_sweep(const Options& opt, std::ostream& out, std::ostream& err);

} // namespace fsqkd::cli
