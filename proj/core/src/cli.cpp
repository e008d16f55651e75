#include "fsqkd/cli.hpp"

#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "fsqkd/config.hpp"
#include "fsqkd/csv.hpp"
#include "fsqkd/errors.hpp"
#include "fsqkd/rng.hpp"
#include "fsqkd/sim.hpp"
#include "fsqkd/version.hpp"

namespace fsqkd::cli {

namespace {

int guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntimeError;
    }
}

config::RunSpec load_with_overrides(const Options& opt) {
    auto spec = config::load(opt.config_path);
    if (opt.seed) spec.scenario.master_seed = *opt.seed;
    if (opt.slots) spec.scenario.max_sim_slots = *opt.slots;
    return spec;
}

std::string utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void emit_manifest(const Options& opt, const config::RunSpec& spec,
                   const std::vector<std::string>& flags) {
    if (opt.out_path.empty()) return;
    config::RunManifest m;
    m.tool_version = kVersion;
    m.scenario_digest = config::digest_hex(spec);
    m.created_utc = utc_now();
    m.assumption_flags = flags;
    m.outputs = {opt.out_path};
    config::write_manifest(opt.out_path + ".manifest.json", m, spec);
}

/// CSV goes to the --out file when given, otherwise to the report stream.
class CsvTarget {
public:
    CsvTarget(const Options& opt, std::ostream& fallback) {
        if (!opt.out_path.empty()) {
            file_.open(opt.out_path, std::ios::binary | std::ios::trunc);
            if (!file_) throw std::runtime_error("cannot write output file: " + opt.out_path);
            os_ = &file_;
        } else {
            os_ = &fallback;
        }
    }
    std::ostream& stream() { return *os_; }

private:
    std::ofstream file_;
    std::ostream* os_ = nullptr;
};

std::string cn2_column_name(double cn2) { return "cn2_" + csv::num(cn2); }

} // namespace

int cmd_plan(const Options& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto spec = load_with_overrides(opt);
        const auto& sc = spec.scenario;
        const std::vector<double> cn2_list =
            spec.plan_cn2_list ? *spec.plan_cn2_list : std::vector<double>{sc.turbulence.cn2};

        CsvTarget target(opt, out);
        csv::Writer w(target.stream());
        w.header({"cn2", "range_m", "strategy", "aperture_ratio", "boundary_distance_m",
                  "boundary_saturated"});
        for (const double cn2 : cn2_list) {
            turbulence::TurbulenceParams t{cn2};
            const auto d = tracking::select_strategy(t, sc.link.tx_beam, sc.link);
            w.row({csv::num(cn2), csv::num(sc.link.range_m), tracking::to_string(d.strategy),
                   csv::num(d.aperture_ratio), csv::num(d.boundary_distance_m),
                   csv::boolean(d.boundary_saturated)});
            if (!opt.out_path.empty()) {
                out << "cn2=" << csv::num(cn2) << " strategy=" << tracking::to_string(d.strategy)
                    << " aperture_ratio=" << csv::num(d.aperture_ratio)
                    << " boundary_m=" << csv::num(d.boundary_distance_m)
                    << (d.boundary_saturated ? " (saturated at search cap)" : "") << " - "
                    << d.reason << '\n';
            }
        }
        emit_manifest(opt, spec, {});
        return kExitOk;
    });
}

int cmd_interrupt(const Options& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto spec = load_with_overrides(opt);
        const auto& sc = spec.scenario;

        std::vector<double> distances;
        if (spec.interrupt_distances_m) {
            distances = *spec.interrupt_distances_m;
        } else {
            for (double d = 500.0; d <= 5000.0 + 1e-9; d += 250.0) distances.push_back(d);
        }
        const std::vector<double> cn2_list = spec.interrupt_cn2_list
                                                 ? *spec.interrupt_cn2_list
                                                 : std::vector<double>{1e-15, 1e-14, 1e-13};
        const double capture = spec.interrupt_capture_radius_m
                                   ? *spec.interrupt_capture_radius_m
                                   : sc.link.rx_aperture_radius_m();

        CsvTarget target(opt, out);
        csv::Writer w(target.stream());
        std::vector<std::string> head{"distance_m"};
        for (const double cn2 : cn2_list) head.push_back(cn2_column_name(cn2));
        w.header(head);
        for (const double d : distances) {
            std::vector<std::string> cells{csv::num(d)};
            for (const double cn2 : cn2_list) {
                turbulence::TurbulenceParams t{cn2};
                cells.push_back(
                    csv::num(turbulence::interruption_fraction(t, sc.link.tx_beam, d, capture)));
            }
            w.row(cells);
        }
        emit_manifest(opt, spec, {});
        return kExitOk;
    });
}

int cmd_track(const Options& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto spec = load_with_overrides(opt);
        const auto& sc = spec.scenario;
        if (!sc.tracking) {
            throw ConfigError("'tracking' section is required for the track command");
        }

        const auto stats = turbulence::evaluate(sc.turbulence, sc.link.tx_beam, sc.link.range_m,
                                                sc.link.rx_aperture_diameter_m);
        tracking::WanderProcess wp;
        wp.rms = std::sqrt(stats.wander_var_m2 / 2.0);
        wp.bandwidth_hz = sc.wander_bandwidth_hz;
        wp.sample_rate_hz = std::max(10.0 * wp.bandwidth_hz, sc.tracking->loop_rate_hz);
        wp.duration_s = sc.duration_s;
        wp.seed = rng::derive_seed(sc.master_seed, "wander");

        const auto result = tracking::closed_loop_sim(wp, *sc.tracking);

        CsvTarget target(opt, out);
        csv::Writer w(target.stream());
        w.comment("rms_residual=" + csv::num(result.rms_residual));
        w.comment("rms_open_loop=" + csv::num(result.rms_open_loop));
        w.comment("rejection_db=" + csv::num(result.rejection_db));
        w.comment("saturation_fraction=" + csv::num(result.saturation_fraction));
        w.comment("diverged=" + csv::boolean(result.diverged));
        w.header({"t_s", "wander_x", "wander_y", "residual_x", "residual_y"});
        for (std::size_t k = 0; k < result.residual.size(); ++k) {
            const double t = static_cast<double>(k) * result.residual.dt;
            w.row({csv::num(t), csv::num(result.wander.x[k]), csv::num(result.wander.y[k]),
                   csv::num(result.residual.x[k]), csv::num(result.residual.y[k])});
        }
        if (!opt.out_path.empty()) {
            out << "rms_residual=" << csv::num(result.rms_residual)
                << " rejection_db=" << csv::num(result.rejection_db)
                << " saturation_fraction=" << csv::num(result.saturation_fraction) << '\n';
        }
        emit_manifest(opt, spec, {});
        return kExitOk;
    });
}

namespace {

std::vector<std::string> stats_header(bool with_value) {
    std::vector<std::string> h;
    if (with_value) h.push_back("value");
    for (const char* name : {"qber", "sifted_rate_bps", "secret_key_rate_bps", "availability",
                             "background_rate_hz", "abort"}) {
        h.emplace_back(name);
    }
    return h;
}

std::vector<std::string> stats_row(const sim::SimResult& r) {
    return {csv::num(r.stats.qber),
            csv::num(r.stats.sifted_rate_bps),
            csv::num(r.stats.secret_key_rate_bps),
            csv::num(r.availability),
            csv::num(r.stats.background_rate_hz),
            csv::boolean(r.stats.abort)};
}

} // namespace

int cmd_run(const Options& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto spec = load_with_overrides(opt);
        const auto result = sim::run_scenario(spec.scenario);

        CsvTarget target(opt, out);
        csv::Writer w(target.stream());
        w.header(stats_header(false));
        w.row(stats_row(result));
        if (!opt.out_path.empty()) {
            out << "qber=" << csv::num(result.stats.qber)
                << " skr_bps=" << csv::num(result.stats.secret_key_rate_bps)
                << " sifted_bps=" << csv::num(result.stats.sifted_rate_bps)
                << " availability=" << csv::num(result.availability)
                << " abort=" << csv::boolean(result.stats.abort) << '\n';
        }
        emit_manifest(opt, spec, result.assumption_flags);
        return kExitOk;
    });
}

int cmd_sweep(const Options& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto spec = load_with_overrides(opt);
        if (!spec.sweep_parameter) {
            throw ConfigError("'sweep' section is required for the sweep command");
        }
        const bool analytic = opt.analytic_only || spec.sweep_analytic_only;

        CsvTarget target(opt, out);
        csv::Writer w(target.stream());
        std::vector<std::string> flags;
        if (analytic) {
            const auto rows =
                sim::analytic_sweep(spec.scenario, *spec.sweep_parameter, *spec.sweep_values);
            w.header({"value", "rytov_var", "w_diff_m", "w_lt_m", "wander_var_m2",
                      "aoa_var_rad2", "interruption_fraction", "aperture_ratio"});
            for (const auto& r : rows) {
                w.row({csv::num(r.value), csv::num(r.rytov_var), csv::num(r.w_diff_m),
                       csv::num(r.w_lt_m), csv::num(r.wander_var_m2), csv::num(r.aoa_var_rad2),
                       csv::num(r.interruption_fraction), csv::num(r.aperture_ratio)});
            }
        } else {
            const auto rows = sim::sweep(spec.scenario, *spec.sweep_parameter,
                                         *spec.sweep_values, opt.parallelism);
            w.header(stats_header(true));
            for (const auto& r : rows) {
                auto cells = stats_row(r.result);
                cells.insert(cells.begin(), csv::num(r.value));
                w.row(cells);
            }
            if (!rows.empty()) flags = rows.front().result.assumption_flags;
        }
        emit_manifest(opt, spec, flags);
        return kExitOk;
    });
}

} // namespace fsqkd::cli
