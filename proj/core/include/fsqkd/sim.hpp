#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fsqkd/b92.hpp"
#include "fsqkd/channel.hpp"
#include "fsqkd/tracking.hpp"
#include "fsqkd/turbulence.hpp"

namespace fsqkd::sim {

/// One end-to-end run description. tracking absent means the uncorrected
/// link: raw beam wander gates the protocol directly.
struct Scenario {
    channel::LinkConfig link{};
    turbulence::TurbulenceParams turbulence{};
    b92::PulseSource source{};
    b92::DetectorModel detector{};
    channel::BackgroundEnvironment background{};
    std::optional<tracking::TrackingLoopConfig> tracking{};
    double wander_bandwidth_hz = 100.0;
    double duration_s = 1.0;
    std::uint64_t master_seed = 1;
    /// Monte Carlo window: at GHz clocks the full duration is decimated down
    /// to this many simulated slots and rates are extrapolated.
    std::uint64_t max_sim_slots = 10'000'000;
};

struct SimResult {
    b92::TransmissionStats stats{};
    double availability = 1.0;
    std::optional<tracking::LoopResult> loop{};
    turbulence::TurbulenceStats derived_turbulence{};
    Scenario config_echo{};
    std::vector<std::string> assumption_flags{};
};

/// turbulence stats -> transmittance and background rate -> wander (open
/// loop, or closed loop when tracking is configured) -> per-slot fade mask ->
/// protocol Monte Carlo. Deterministic per master_seed; sub-seeds derive by
/// component label.
SimResult run_scenario(const Scenario& s);

struct SweepRow {
    double value = 0.0;
    SimResult result{};
};

/// One run_scenario per value, each on a copy of the base scenario with the
/// addressed field replaced and the same master seed (paired rows). Rows run
/// in parallel; output order follows the value order regardless of the
/// parallelism degree.
std::vector<SweepRow> sweep(const Scenario& base, std::string_view parameter_path,
                            std::span<const double> values, unsigned max_parallelism = 0);

/// Closed-form-only row: no Monte Carlo, just the turbulence statistics,
/// interruption fraction, and aperture ratio at the receiver geometry.
struct AnalyticRow {
    double value = 0.0;
    double rytov_var = 0.0;
    double w_diff_m = 0.0;
    double w_lt_m = 0.0;
    double wander_var_m2 = 0.0;
    double aoa_var_rad2 = 0.0;
    double interruption_fraction = 0.0;
    double aperture_ratio = 0.0;
};

std::vector<AnalyticRow> analytic_sweep(const Scenario& base, std::string_view parameter_path,
                                        std::span<const double> values);

/// Scalar fields addressable by sweep(); unknown paths raise ConfigError
/// listing these.
std::vector<std::string> parameter_paths();
double get_parameter(const Scenario& s, std::string_view path);
void set_parameter(Scenario& s, std::string_view path, double value);

} // namespace fsqkd::sim
