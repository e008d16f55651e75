#include "fsqkd/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fsqkd/errors.hpp"
#include "fsqkd/rng.hpp"

namespace fsqkd::config {

namespace {

using nlohmann::json;

/// Strict object reader: every key must be consumed, leftovers are errors.
class Section {
public:
    Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
        if (!j_.is_object()) throw ConfigError("'" + name_ + "' must be an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    double number(const std::string& key, double fallback) {
        const json* v = take(key);
        if (!v) return fallback;
        return as_number(*v, key);
    }

    std::uint64_t unsigned_int(const std::string& key, std::uint64_t fallback) {
        const json* v = take(key);
        if (!v) return fallback;
        if (!v->is_number_integer() || v->get<std::int64_t>() < 0) {
            throw ConfigError(path(key) + " must be a non-negative integer");
        }
        return v->get<std::uint64_t>();
    }

    bool boolean(const std::string& key, bool fallback) {
        const json* v = take(key);
        if (!v) return fallback;
        if (!v->is_boolean()) throw ConfigError(path(key) + " must be a boolean");
        return v->get<bool>();
    }

    std::string text(const std::string& key, const std::string& fallback) {
        const json* v = take(key);
        if (!v) return fallback;
        if (!v->is_string()) throw ConfigError(path(key) + " must be a string");
        return v->get<std::string>();
    }

    std::optional<std::vector<double>> number_list(const std::string& key) {
        const json* v = take(key);
        if (!v) return std::nullopt;
        if (!v->is_array() || v->empty()) {
            throw ConfigError(path(key) + " must be a non-empty array of numbers");
        }
        std::vector<double> out;
        out.reserve(v->size());
        for (const auto& e : *v) out.push_back(as_number(e, key));
        return out;
    }

    const json* object(const std::string& key) { return take(key); }

    std::string path(const std::string& key) const {
        return name_.empty() ? "'" + key + "'" : "'" + name_ + "." + key + "'";
    }

    /// Fail-closed check; call after all known keys were consumed.
    void finish() const {
        for (const auto& item : j_.items()) {
            if (!seen_.count(item.key())) {
                throw ConfigError("unknown key '" + item.key() + "' in section '" +
                                  (name_.empty() ? std::string("<root>") : name_) + "'");
            }
        }
    }

private:
    const json* take(const std::string& key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    double as_number(const json& v, const std::string& key) const {
        if (!v.is_number()) throw ConfigError(path(key) + " must be a number");
        return v.get<double>();
    }

    const json& j_;
    std::string name_;
    std::set<std::string> seen_;
};

turbulence::BeamGeometry parse_beam(const json& j) {
    Section s(j, "link.tx_beam");
    turbulence::BeamGeometry b;
    b.w0_m = s.number("w0_m", b.w0_m);
    b.wavelength_m = s.number("wavelength_m", b.wavelength_m);
    b.collimated = s.boolean("collimated", b.collimated);
    s.finish();
    if (!b.collimated) throw ConfigError("'link.tx_beam.collimated' must be true: only collimated launches are modeled");
    return b;
}

channel::LinkConfig parse_link(const json& j) {
    Section s(j, "link");
    channel::LinkConfig l;
    l.range_m = s.number("range_m", l.range_m);
    if (const json* beam = s.object("tx_beam")) l.tx_beam = parse_beam(*beam);
    l.rx_aperture_diameter_m = s.number("rx_aperture_diameter_m", l.rx_aperture_diameter_m);
    l.atm_attenuation_db_per_km = s.number("atm_attenuation_db_per_km", l.atm_attenuation_db_per_km);
    l.optics_efficiency = s.number("optics_efficiency", l.optics_efficiency);
    l.fiber_core_diameter_m = s.number("fiber_core_diameter_m", l.fiber_core_diameter_m);
    l.focal_length_m = s.number("focal_length_m", l.focal_length_m);
    l.spectral_filter_fwhm_nm = s.number("spectral_filter_fwhm_nm", l.spectral_filter_fwhm_nm);
    s.finish();
    return l;
}

b92::PulseSource parse_source(const json& j) {
    Section s(j, "source");
    b92::PulseSource src;
    src.clock_rate_hz = s.number("clock_rate_hz", src.clock_rate_hz);
    src.mu = s.number("mu", src.mu);
    if (auto angles = s.number_list("state_angles_rad")) {
        if (angles->size() != 2) {
            throw ConfigError("'source.state_angles_rad' must hold exactly two angles");
        }
        src.state_angles_rad = {(*angles)[0], (*angles)[1]};
    }
    src.extinction_ratio_db = s.number("extinction_ratio_db", src.extinction_ratio_db);
    s.finish();
    return src;
}

b92::DetectorModel parse_detector(const json& j) {
    Section s(j, "detector");
    b92::DetectorModel d;
    d.efficiency = s.number("efficiency", d.efficiency);
    d.dark_count_rate_hz = s.number("dark_count_rate_hz", d.dark_count_rate_hz);
    d.dead_time_s = s.number("dead_time_s", d.dead_time_s);
    d.gate_window_s = s.number("gate_window_s", d.gate_window_s);
    s.finish();
    return d;
}

channel::BackgroundEnvironment parse_background(const json& j) {
    Section s(j, "background");
    channel::BackgroundEnvironment env;
    env.sky_radiance = s.number("sky_radiance", env.sky_radiance);
    env.label = s.text("label", env.label);
    s.finish();
    return env;
}

tracking::PidGains parse_pid(const json& j) {
    Section s(j, "tracking.pid");
    tracking::PidGains g;
    g.kp = s.number("kp", 0.0);
    g.ki = s.number("ki", 0.0);
    g.kd = s.number("kd", 0.0);
    s.finish();
    return g;
}

tracking::TrackingLoopConfig parse_tracking(const json& j) {
    Section s(j, "tracking");
    tracking::TrackingLoopConfig c;
    c.loop_rate_hz = s.number("loop_rate_hz", c.loop_rate_hz);
    c.psd_noise_rms = s.number("psd_noise_rms", c.psd_noise_rms);
    c.fsm_bandwidth_hz = s.number("fsm_bandwidth_hz", c.fsm_bandwidth_hz);
    c.fsm_range = s.number("fsm_range", c.fsm_range);
    c.fsm_slew_limit = s.number("fsm_slew_limit", c.fsm_slew_limit);
    const std::string mode = s.text("compensation", "receiver-compensation");
    if (mode == "receiver-compensation") {
        c.compensation = tracking::CompensationStrategy::ReceiverCompensation;
    } else if (mode == "emitter-pre-compensation") {
        c.compensation = tracking::CompensationStrategy::EmitterPreCompensation;
    } else {
        throw ConfigError("'tracking.compensation' must be 'receiver-compensation' or "
                          "'emitter-pre-compensation'");
    }
    c.atmospheric_coherence_time_s =
        s.number("atmospheric_coherence_time_s", c.atmospheric_coherence_time_s);
    c.round_trip_delay_s = s.number("round_trip_delay_s", c.round_trip_delay_s);
    const bool explicit_pid = s.has("pid");
    if (explicit_pid) {
        const json* pid = s.object("pid");
        c.pid = parse_pid(*pid);
    }
    s.finish();
    // No explicit gains: resolve them with the documented tuning recipe so
    // the canonical config carries concrete, reproducible numbers.
    if (!explicit_pid) c.pid = tracking::tune_pid(c);
    return c;
}

} // namespace

RunSpec parse(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }

    Section root(j, "");
    RunSpec spec;
    auto& sc = spec.scenario;
    try {
        if (const json* link = root.object("link")) sc.link = parse_link(*link);
        if (const json* turb = root.object("turbulence")) {
            Section s(*turb, "turbulence");
            sc.turbulence.cn2 = s.number("cn2", sc.turbulence.cn2);
            s.finish();
        }
        if (const json* src = root.object("source")) sc.source = parse_source(*src);
        if (const json* det = root.object("detector")) sc.detector = parse_detector(*det);
        if (const json* bg = root.object("background")) sc.background = parse_background(*bg);
        if (const json* trk = root.object("tracking")) sc.tracking = parse_tracking(*trk);
        sc.wander_bandwidth_hz = root.number("wander_bandwidth_hz", sc.wander_bandwidth_hz);
        sc.duration_s = root.number("duration_s", sc.duration_s);
        sc.master_seed = root.unsigned_int("master_seed", sc.master_seed);
        sc.max_sim_slots = root.unsigned_int("slots", sc.max_sim_slots);

        if (const json* plan = root.object("plan")) {
            Section s(*plan, "plan");
            spec.plan_cn2_list = s.number_list("cn2_list");
            s.finish();
        }
        if (const json* intr = root.object("interrupt")) {
            Section s(*intr, "interrupt");
            spec.interrupt_distances_m = s.number_list("distances_m");
            spec.interrupt_cn2_list = s.number_list("cn2_list");
            if (s.has("capture_radius_m")) {
                spec.interrupt_capture_radius_m = s.number("capture_radius_m", 0.0);
            }
            s.finish();
        }
        if (const json* sw = root.object("sweep")) {
            Section s(*sw, "sweep");
            spec.sweep_parameter = s.text("parameter", "");
            spec.sweep_values = s.number_list("values");
            spec.sweep_analytic_only = s.boolean("analytic_only", false);
            s.finish();
            if (spec.sweep_parameter->empty() || !spec.sweep_values) {
                throw ConfigError("'sweep' requires both 'parameter' and 'values'");
            }
        }
        root.finish();
    } catch (const std::domain_error& e) {
        throw ConfigError(std::string("invalid config value: ") + e.what());
    }

    // Validate invariants eagerly so errors carry field names at load time.
    try {
        sc.link.validate();
        check_nonnegative(sc.turbulence.cn2, "turbulence.cn2");
        check_positive(sc.source.mu, "source.mu");
        check_positive(sc.source.clock_rate_hz, "source.clock_rate_hz");
        check_nonnegative(sc.source.extinction_ratio_db, "source.extinction_ratio_db");
        check_unit_interval(sc.detector.efficiency, "detector.efficiency");
        check_nonnegative(sc.detector.dark_count_rate_hz, "detector.dark_count_rate_hz");
        check_nonnegative(sc.detector.dead_time_s, "detector.dead_time_s");
        check_positive(sc.detector.gate_window_s, "detector.gate_window_s");
        check_nonnegative(sc.background.sky_radiance, "background.sky_radiance");
        check_positive(sc.duration_s, "duration_s");
        check_positive(sc.wander_bandwidth_hz, "wander_bandwidth_hz");
        if (spec.interrupt_capture_radius_m) {
            check_positive(*spec.interrupt_capture_radius_m, "interrupt.capture_radius_m");
        }
    } catch (const std::domain_error& e) {
        throw ConfigError(std::string("invalid config value: ") + e.what());
    }
    return spec;
}

RunSpec load(const std::filesystem::path& config_path) {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open config file: " + config_path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

namespace {

json beam_to_json(const turbulence::BeamGeometry& b) {
    return json{{"w0_m", b.w0_m}, {"wavelength_m", b.wavelength_m}, {"collimated", b.collimated}};
}

json scenario_to_json(const sim::Scenario& sc) {
    json j;
    j["link"] = {
        {"range_m", sc.link.range_m},
        {"tx_beam", beam_to_json(sc.link.tx_beam)},
        {"rx_aperture_diameter_m", sc.link.rx_aperture_diameter_m},
        {"atm_attenuation_db_per_km", sc.link.atm_attenuation_db_per_km},
        {"optics_efficiency", sc.link.optics_efficiency},
        {"fiber_core_diameter_m", sc.link.fiber_core_diameter_m},
        {"focal_length_m", sc.link.focal_length_m},
        {"spectral_filter_fwhm_nm", sc.link.spectral_filter_fwhm_nm},
    };
    j["turbulence"] = {{"cn2", sc.turbulence.cn2}};
    j["source"] = {
        {"clock_rate_hz", sc.source.clock_rate_hz},
        {"mu", sc.source.mu},
        {"state_angles_rad", {sc.source.state_angles_rad[0], sc.source.state_angles_rad[1]}},
        {"extinction_ratio_db", sc.source.extinction_ratio_db},
    };
    j["detector"] = {
        {"efficiency", sc.detector.efficiency},
        {"dark_count_rate_hz", sc.detector.dark_count_rate_hz},
        {"dead_time_s", sc.detector.dead_time_s},
        {"gate_window_s", sc.detector.gate_window_s},
    };
    j["background"] = {
        {"sky_radiance", sc.background.sky_radiance},
        {"label", sc.background.label},
    };
    if (sc.tracking) {
        const auto& t = *sc.tracking;
        j["tracking"] = {
            {"pid", {{"kp", t.pid.kp}, {"ki", t.pid.ki}, {"kd", t.pid.kd}}},
            {"loop_rate_hz", t.loop_rate_hz},
            {"psd_noise_rms", t.psd_noise_rms},
            {"fsm_bandwidth_hz", t.fsm_bandwidth_hz},
            {"fsm_range", t.fsm_range},
            {"fsm_slew_limit", t.fsm_slew_limit},
            {"compensation", tracking::to_string(t.compensation)},
            {"atmospheric_coherence_time_s", t.atmospheric_coherence_time_s},
            {"round_trip_delay_s", t.round_trip_delay_s},
        };
    }
    j["wander_bandwidth_hz"] = sc.wander_bandwidth_hz;
    j["duration_s"] = sc.duration_s;
    j["master_seed"] = sc.master_seed;
    j["slots"] = sc.max_sim_slots;
    return j;
}

json runspec_to_json(const RunSpec& r) {
    json j = scenario_to_json(r.scenario);
    if (r.plan_cn2_list) j["plan"] = {{"cn2_list", *r.plan_cn2_list}};
    if (r.interrupt_distances_m || r.interrupt_cn2_list || r.interrupt_capture_radius_m) {
        json intr;
        if (r.interrupt_distances_m) intr["distances_m"] = *r.interrupt_distances_m;
        if (r.interrupt_cn2_list) intr["cn2_list"] = *r.interrupt_cn2_list;
        if (r.interrupt_capture_radius_m) intr["capture_radius_m"] = *r.interrupt_capture_radius_m;
        j["interrupt"] = intr;
    }
    if (r.sweep_parameter) {
        j["sweep"] = {
            {"parameter", *r.sweep_parameter},
            {"values", *r.sweep_values},
            {"analytic_only", r.sweep_analytic_only},
        };
    }
    return j;
}

} // namespace

std::string canonical_json(const RunSpec& r) { return runspec_to_json(r).dump(2); }

std::uint64_t digest(const RunSpec& r) { return rng::fnv1a64(canonical_json(r)); }

std::string digest_hex(const RunSpec& r) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(digest(r)));
    return buf;
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m,
                    const RunSpec& resolved) {
    json j;
    j["tool_version"] = m.tool_version;
    j["scenario_digest"] = m.scenario_digest;
    j["created_utc"] = m.created_utc;
    j["assumption_flags"] = m.assumption_flags;
    j["outputs"] = m.outputs;
    j["config"] = runspec_to_json(resolved);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest: " + path.string());
    out << j.dump(2) << '\n';
}

} // namespace fsqkd::config
