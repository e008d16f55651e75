#include "fsqkd/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fsqkd/errors.hpp"
#include "fsqkd/rng.hpp"

namespace fsqkd::sim {

namespace {

constexpr double kLightSpeed = 299792458.0;

void validate_scenario(const Scenario& s) {
    s.link.validate();
    check_positive(s.duration_s, "duration_s");
    check_positive(s.wander_bandwidth_hz, "wander_bandwidth_hz");
    check_nonnegative(s.turbulence.cn2, "turbulence.cn2");
    if (s.max_sim_slots == 0) throw std::domain_error("max_sim_slots must be > 0");
}

struct ParamAccess {
    const char* path;
    double (*get)(const Scenario&);
    void (*set)(Scenario&, double);
};

#define FSQKD_PARAM(name, field)                                 \
    ParamAccess {                                                \
        name, [](const Scenario& s) -> double { return s.field; }, \
            [](Scenario& s, double v) { s.field = v; }           \
    }

const std::vector<ParamAccess>& param_table() {
    static const std::vector<ParamAccess> table = {
        FSQKD_PARAM("link.range_m", link.range_m),
        FSQKD_PARAM("link.rx_aperture_diameter_m", link.rx_aperture_diameter_m),
        FSQKD_PARAM("link.atm_attenuation_db_per_km", link.atm_attenuation_db_per_km),
        FSQKD_PARAM("link.optics_efficiency", link.optics_efficiency),
        FSQKD_PARAM("link.fiber_core_diameter_m", link.fiber_core_diameter_m),
        FSQKD_PARAM("link.focal_length_m", link.focal_length_m),
        FSQKD_PARAM("link.spectral_filter_fwhm_nm", link.spectral_filter_fwhm_nm),
        FSQKD_PARAM("link.tx_beam.w0_m", link.tx_beam.w0_m),
        FSQKD_PARAM("link.tx_beam.wavelength_m", link.tx_beam.wavelength_m),
        FSQKD_PARAM("turbulence.cn2", turbulence.cn2),
        FSQKD_PARAM("source.clock_rate_hz", source.clock_rate_hz),
        FSQKD_PARAM("source.mu", source.mu),
        FSQKD_PARAM("source.extinction_ratio_db", source.extinction_ratio_db),
        FSQKD_PARAM("detector.efficiency", detector.efficiency),
        FSQKD_PARAM("detector.dark_count_rate_hz", detector.dark_count_rate_hz),
        FSQKD_PARAM("detector.dead_time_s", detector.dead_time_s),
        FSQKD_PARAM("detector.gate_window_s", detector.gate_window_s),
        FSQKD_PARAM("background.sky_radiance", background.sky_radiance),
        FSQKD_PARAM("wander_bandwidth_hz", wander_bandwidth_hz),
        FSQKD_PARAM("duration_s", duration_s),
    };
    return table;
}

#undef FSQKD_PARAM

const ParamAccess& find_param(std::string_view path) {
    for (const auto& p : param_table()) {
        if (path == p.path) return p;
    }
    std::ostringstream msg;
    msg << "unknown parameter path '" << path << "'; valid paths:";
    for (const auto& p : param_table()) msg << ' ' << p.path;
    throw ConfigError(msg.str());
}

std::uint64_t window_slots(const Scenario& s, std::uint64_t& notional_out) {
    const double notional_f = std::max(1.0, s.duration_s * s.source.clock_rate_hz);
    const std::uint64_t notional =
        notional_f >= 1e18 ? static_cast<std::uint64_t>(1e18)
                           : static_cast<std::uint64_t>(std::llround(notional_f));
    notional_out = notional;
    return std::min<std::uint64_t>(s.max_sim_slots, notional);
}

} // namespace

namespace {
SimResult run_scenario_impl(const Scenario& s);
} // namespace

SimResult run_scenario(const Scenario& s) {
    try {
        return run_scenario_impl(s);
    } catch (const std::domain_error& e) {
        std::ostringstream msg;
        msg << e.what() << " (scenario: range " << s.link.range_m << " m, cn2 "
            << s.turbulence.cn2 << ", seed " << s.master_seed << ")";
        throw std::domain_error(msg.str());
    }
}

namespace {

SimResult run_scenario_impl(const Scenario& s) {
    validate_scenario(s);

    SimResult r;
    r.config_echo = s;
    r.derived_turbulence = turbulence::evaluate(s.turbulence, s.link.tx_beam, s.link.range_m,
                                                s.link.rx_aperture_diameter_m);

    const double transmittance = channel::total_transmittance(s.link, r.derived_turbulence.w_lt_m);
    const double background_hz =
        channel::background_count_rate(s.link, s.background, s.detector.efficiency);

    std::uint64_t notional = 0;
    const std::uint64_t n_slots = window_slots(s, notional);

    tracking::WanderProcess wp;
    wp.rms = std::sqrt(r.derived_turbulence.wander_var_m2 / 2.0); // per-axis share
    wp.bandwidth_hz = s.wander_bandwidth_hz;
    wp.duration_s = s.duration_s;
    wp.seed = rng::derive_seed(s.master_seed, "wander");
    const double min_sample_rate = 10.0 * wp.bandwidth_hz;

    tracking::TwoAxisSeries residual;
    if (s.tracking) {
        auto loop = *s.tracking;
        wp.sample_rate_hz = std::max(min_sample_rate, loop.loop_rate_hz);
        if (loop.compensation == tracking::CompensationStrategy::EmitterPreCompensation &&
            loop.round_trip_delay_s == 0.0) {
            loop.round_trip_delay_s = 2.0 * s.link.range_m / kLightSpeed;
        }
        r.loop = tracking::closed_loop_sim(wp, loop);
        residual = r.loop->residual;
    } else {
        wp.sample_rate_hz = min_sample_rate;
        residual = tracking::generate_wander(wp); // uncorrected link
    }

    const double capture_radius = s.link.rx_aperture_radius_m();
    const double slot_rate_eff = static_cast<double>(n_slots) / residual.duration_s();
    const auto fade = tracking::residual_to_fade_mask(residual, capture_radius, slot_rate_eff);
    if (fade.pass.size() != n_slots) {
        throw std::runtime_error("fade mask size mismatch against simulated window");
    }

    r.stats = b92::run_protocol(s.source, s.detector, transmittance, background_hz, fade.pass,
                                n_slots, rng::derive_seed(s.master_seed, "protocol"));
    r.availability = fade.availability;

    r.assumption_flags.push_back(
        "skr-model: entropy penalty with error-correction overhead 1.2 (modeling choice)");
    r.assumption_flags.push_back(
        "optics: focal length, receiver throughput and detector figures are assumed defaults");
    if (n_slots < notional) {
        std::ostringstream f;
        f << "rate-scaling: simulated " << n_slots << " of " << notional
          << " slots; per-second rates extrapolated";
        r.assumption_flags.push_back(f.str());
    }
    if (!r.derived_turbulence.weak_fluctuation()) {
        r.assumption_flags.push_back(
            "turbulence: rytov variance exceeds the weak-fluctuation regime; "
            "closed forms extrapolated");
    }
    return r;
}

} // namespace

std::vector<SweepRow> sweep(const Scenario& base, std::string_view parameter_path,
                            std::span<const double> values, unsigned max_parallelism) {
    if (values.empty()) throw ConfigError("sweep values must be non-empty");
    const auto& param = find_param(parameter_path); // fail fast on bad paths
    validate_scenario(base);

    std::vector<SweepRow> rows(values.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= values.size()) return;
            try {
                Scenario s = base;
                param.set(s, values[i]);
                rows[i] = {values[i], run_scenario(s)};
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };

    unsigned n_threads = max_parallelism != 0 ? max_parallelism
                                              : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(values.size()));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
    return rows;
}

std::vector<AnalyticRow> analytic_sweep(const Scenario& base, std::string_view parameter_path,
                                        std::span<const double> values) {
    if (values.empty()) throw ConfigError("sweep values must be non-empty");
    const auto& param = find_param(parameter_path);

    std::vector<AnalyticRow> rows;
    rows.reserve(values.size());
    for (const double v : values) {
        Scenario s = base;
        param.set(s, v);
        const auto stats = turbulence::evaluate(s.turbulence, s.link.tx_beam, s.link.range_m,
                                                s.link.rx_aperture_diameter_m);
        AnalyticRow row;
        row.value = v;
        row.rytov_var = stats.rytov_var;
        row.w_diff_m = stats.w_diff_m;
        row.w_lt_m = stats.w_lt_m;
        row.wander_var_m2 = stats.wander_var_m2;
        row.aoa_var_rad2 = stats.aoa_var_rad2;
        row.interruption_fraction = turbulence::interruption_fraction(
            s.turbulence, s.link.tx_beam, s.link.range_m, s.link.rx_aperture_radius_m());
        row.aperture_ratio = turbulence::aperture_ratio(s.turbulence, s.link.tx_beam,
                                                        s.link.range_m,
                                                        s.link.rx_aperture_diameter_m);
        rows.push_back(row);
    }
    return rows;
}

std::vector<std::string> parameter_paths() {
    std::vector<std::string> out;
    for (const auto& p : param_table()) out.emplace_back(p.path);
    return out;
}

double get_parameter(const Scenario& s, std::string_view path) { return find_param(path).get(s); }

void set_parameter(Scenario& s, std::string_view path, double value) {
    find_param(path).set(s, value);
}

} // namespace fsqkd::sim
