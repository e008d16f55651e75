#include "fsqkd/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "fsqkd/errors.hpp"
#include "fsqkd/rng.hpp"

namespace fsqkd::tracking {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_process(const WanderProcess& p) {
    check_nonnegative(p.rms, "rms");
    check_positive(p.bandwidth_hz, "bandwidth_hz");
    check_positive(p.sample_rate_hz, "sample_rate_hz");
    check_positive(p.duration_s, "duration_s");
    if (p.sample_rate_hz < 10.0 * p.bandwidth_hz) {
        throw std::domain_error("sample_rate_hz must be >= 10x bandwidth_hz");
    }
}

void check_loop(const TrackingLoopConfig& c) {
    check_positive(c.loop_rate_hz, "loop_rate_hz");
    check_nonnegative(c.psd_noise_rms, "psd_noise_rms");
    check_positive(c.fsm_bandwidth_hz, "fsm_bandwidth_hz");
    check_positive(c.fsm_range, "fsm_range");
    check_positive(c.fsm_slew_limit, "fsm_slew_limit");
    if (!std::isfinite(c.pid.kp) || !std::isfinite(c.pid.ki) || !std::isfinite(c.pid.kd)) {
        throw std::domain_error("pid gains must be finite");
    }
    if (c.compensation == CompensationStrategy::EmitterPreCompensation) {
        check_positive(c.atmospheric_coherence_time_s, "atmospheric_coherence_time_s");
        check_nonnegative(c.round_trip_delay_s, "round_trip_delay_s");
    }
}

double rms2d(const TwoAxisSeries& s) {
    if (s.x.empty()) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < s.x.size(); ++i) acc += s.x[i] * s.x[i] + s.y[i] * s.y[i];
    return std::sqrt(acc / static_cast<double>(s.x.size()));
}

void fill_axis(std::vector<double>& out, double rms, double phi, double innovation,
               rng::Stream st) {
    double v = rms * st.normal(); // stationary start
    for (auto& sample : out) {
        sample = v;
        v = phi * v + innovation * st.normal();
    }
}

} // namespace

const char* to_string(CompensationStrategy s) {
    return s == CompensationStrategy::ReceiverCompensation ? "receiver-compensation"
                                                           : "emitter-pre-compensation";
}

TwoAxisSeries generate_wander(const WanderProcess& p) {
    check_process(p);
    const auto n = static_cast<std::size_t>(
        std::max<long long>(1, std::llround(p.duration_s * p.sample_rate_hz)));
    TwoAxisSeries s;
    s.dt = 1.0 / p.sample_rate_hz;
    s.x.resize(n);
    s.y.resize(n);
    const double phi = std::exp(-kTwoPi * p.bandwidth_hz / p.sample_rate_hz);
    const double innovation = p.rms * std::sqrt(1.0 - phi * phi);
    fill_axis(s.x, p.rms, phi, innovation, rng::Stream(rng::derive_seed(p.seed, "wander.x")));
    fill_axis(s.y, p.rms, phi, innovation, rng::Stream(rng::derive_seed(p.seed, "wander.y")));
    return s;
}

double pid_step(PidState& s, const PidGains& g, double error, double dt,
                bool freeze_integrator) {
    check_positive(dt, "dt");
    if (!freeze_integrator) s.integral += error * dt;
    const double derivative = (error - s.prev_error) / dt;
    s.prev_error = error;
    return g.kp * error + g.ki * s.integral + g.kd * derivative;
}

void fsm_step(FsmState& s, const TrackingLoopConfig& c, double command, double dt) {
    check_positive(dt, "dt");
    const double wn = kTwoPi * c.fsm_bandwidth_hz;
    const double decay = std::exp(-wn * dt);
    const double a = s.position - command;
    const double b = s.velocity + wn * a;
    double x = command + (a + b * dt) * decay;
    double v = (b - wn * a - wn * b * dt) * decay;

    const double max_step = c.fsm_slew_limit * dt;
    if (x - s.position > max_step) {
        x = s.position + max_step;
        v = c.fsm_slew_limit;
    } else if (x - s.position < -max_step) {
        x = s.position - max_step;
        v = -c.fsm_slew_limit;
    }

    s.saturated = false;
    if (x > c.fsm_range) {
        x = c.fsm_range;
        v = 0.0;
        s.saturated = true;
    } else if (x < -c.fsm_range) {
        x = -c.fsm_range;
        v = 0.0;
        s.saturated = true;
    }
    s.position = x;
    s.velocity = v;
}

LoopResult closed_loop_sim(const WanderProcess& p, const TrackingLoopConfig& c) {
    check_process(p);
    check_loop(c);
    if (c.loop_rate_hz > p.sample_rate_hz) {
        throw std::domain_error("loop_rate_hz must be <= sample_rate_hz");
    }

    const auto wander = generate_wander(p);
    const auto n_ticks = static_cast<std::size_t>(
        std::max<long long>(1, std::llround(p.duration_s * c.loop_rate_hz)));
    const double dt = 1.0 / c.loop_rate_hz;

    // Emitter pre-compensation steers against a decorrelated copy of the
    // forward-path wander; the quantum beam still sees the true one.
    double rho = 1.0;
    TwoAxisSeries sensed_extra;
    if (c.compensation == CompensationStrategy::EmitterPreCompensation) {
        rho = std::exp(-c.round_trip_delay_s / c.atmospheric_coherence_time_s);
        WanderProcess q = p;
        q.seed = rng::derive_seed(p.seed, "precomp");
        sensed_extra = generate_wander(q);
    }
    const double mix = std::sqrt(std::max(0.0, 1.0 - rho * rho));

    rng::Stream noise_x(rng::derive_seed(p.seed, "psd.x"));
    rng::Stream noise_y(rng::derive_seed(p.seed, "psd.y"));

    LoopResult r;
    r.process = p;
    r.loop = c;
    r.wander.dt = dt;
    r.residual.dt = dt;
    r.wander.x.resize(n_ticks);
    r.wander.y.resize(n_ticks);
    r.residual.x.resize(n_ticks);
    r.residual.y.resize(n_ticks);

    PidState pid_x, pid_y;
    FsmState fsm_x, fsm_y;
    std::size_t saturated_ticks = 0;

    auto axis_tick = [&](double w_true, double w_extra, PidState& pid, FsmState& fsm,
                         rng::Stream& noise) {
        const double w_sensed = rho < 1.0 ? rho * w_true + mix * w_extra : w_true;
        const double meas = w_sensed - fsm.position + c.psd_noise_rms * noise.normal();
        // Anti-windup: hold the integrator only while the error drives the
        // actuator further into its limit; a reversed error unwinds it.
        const bool freeze = fsm.saturated && meas * fsm.position > 0.0;
        const double command = pid_step(pid, c.pid, meas, dt, freeze);
        fsm_step(fsm, c, command, dt);
        if (fsm.saturated) ++saturated_ticks;
        return w_true - fsm.position;
    };

    for (std::size_t k = 0; k < n_ticks; ++k) {
        const double t = static_cast<double>(k) * dt;
        const auto idx = std::min(wander.x.size() - 1,
                                  static_cast<std::size_t>(t * p.sample_rate_hz));
        const double wx = wander.x[idx];
        const double wy = wander.y[idx];
        r.wander.x[k] = wx;
        r.wander.y[k] = wy;
        const double ex = sensed_extra.x.empty() ? 0.0 : sensed_extra.x[idx];
        const double ey = sensed_extra.y.empty() ? 0.0 : sensed_extra.y[idx];
        r.residual.x[k] = axis_tick(wx, ex, pid_x, fsm_x, noise_x);
        r.residual.y[k] = axis_tick(wy, ey, pid_y, fsm_y, noise_y);
    }

    r.rms_open_loop = rms2d(r.wander);
    r.rms_residual = rms2d(r.residual);
    if (!std::isfinite(r.rms_residual)) {
        r.rms_residual = std::numeric_limits<double>::infinity(); // numeric blow-up
    }
    r.saturation_fraction =
        static_cast<double>(saturated_ticks) / static_cast<double>(2 * n_ticks);
    if (r.rms_open_loop > 0.0 && r.rms_residual > 0.0) {
        r.rejection_db = 20.0 * std::log10(r.rms_open_loop / r.rms_residual);
    }
    r.diverged = r.rms_open_loop > 0.0 && r.rms_residual > 10.0 * r.rms_open_loop;
    return r;
}

FadeMask residual_to_fade_mask(const TwoAxisSeries& residual, double capture_radius,
                               double slot_rate_hz) {
    check_positive(capture_radius, "capture_radius");
    check_positive(slot_rate_hz, "slot_rate_hz");
    if (residual.x.empty() || residual.dt <= 0.0) {
        throw std::domain_error("residual series must be non-empty with dt > 0");
    }
    const double duration = residual.duration_s();
    const auto n_slots = static_cast<std::size_t>(
        std::max<long long>(1, std::llround(duration * slot_rate_hz)));
    FadeMask m;
    m.pass.resize(n_slots);
    const double r2 = capture_radius * capture_radius;
    std::size_t faded = 0;
    for (std::size_t j = 0; j < n_slots; ++j) {
        const double t = (static_cast<double>(j) + 0.5) / slot_rate_hz;
        const auto idx =
            std::min(residual.x.size() - 1, static_cast<std::size_t>(t / residual.dt));
        const double dx = residual.x[idx];
        const double dy = residual.y[idx];
        const bool ok = dx * dx + dy * dy <= r2;
        m.pass[j] = ok ? 1 : 0;
        if (!ok) ++faded;
    }
    m.availability = 1.0 - static_cast<double>(faded) / static_cast<double>(n_slots);
    return m;
}

namespace {

// Noiseless, unclamped constant-disturbance loop response used by the tuning
// probe. Returns peak |error| over the first and second halves of the run.
std::pair<double, double> probe_envelope(double kp, double loop_rate_hz, double fsm_bw_hz,
                                         std::size_t n_ticks) {
    TrackingLoopConfig plant;
    plant.loop_rate_hz = loop_rate_hz;
    plant.fsm_bandwidth_hz = fsm_bw_hz;
    plant.fsm_range = std::numeric_limits<double>::infinity();
    plant.fsm_slew_limit = std::numeric_limits<double>::infinity();
    const double dt = 1.0 / loop_rate_hz;
    FsmState fsm;
    double first = 0.0, second = 0.0;
    for (std::size_t k = 0; k < n_ticks; ++k) {
        const double e = 1.0 - fsm.position;
        fsm_step(fsm, plant, kp * e, dt);
        const double mag = std::abs(e);
        double& half_peak = k < n_ticks / 2 ? first : second;
        half_peak = std::max(half_peak, mag);
        if (!std::isfinite(fsm.position) || mag > 1e12) return {first, 1e300};
    }
    return {first, second};
}

bool probe_unstable(double kp, double loop_rate_hz, double fsm_bw_hz) {
    const auto [first, second] = probe_envelope(kp, loop_rate_hz, fsm_bw_hz, 4000);
    return second > first * (1.0 + 1e-9);
}

} // namespace

PidGains tune_pid(const TrackingLoopConfig& c) {
    check_positive(c.loop_rate_hz, "loop_rate_hz");
    check_positive(c.fsm_bandwidth_hz, "fsm_bandwidth_hz");
    const double dt = 1.0 / c.loop_rate_hz;

    double hi = 1.0;
    while (hi < 1e6 && !probe_unstable(hi, c.loop_rate_hz, c.fsm_bandwidth_hz)) hi *= 2.0;
    if (hi >= 1e6) return {1.0, 0.0, 0.0}; // plant never cycles; fall back to unity P
    double lo = hi / 2.0;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (probe_unstable(mid, c.loop_rate_hz, c.fsm_bandwidth_hz) ? hi : lo) = mid;
    }
    const double ku = 0.5 * (lo + hi);

    // Oscillation period at the ultimate gain, from zero crossings of the error.
    TrackingLoopConfig plant = c;
    plant.fsm_range = std::numeric_limits<double>::infinity();
    plant.fsm_slew_limit = std::numeric_limits<double>::infinity();
    FsmState fsm;
    std::vector<std::size_t> crossings;
    double prev = 1.0;
    for (std::size_t k = 0; k < 4000; ++k) {
        const double e = 1.0 - fsm.position;
        fsm_step(fsm, plant, ku * e, dt);
        if (k > 0 && (e == 0.0 || (e > 0.0) != (prev > 0.0))) crossings.push_back(k);
        prev = e;
    }
    double tu = 2.0 * dt;
    if (crossings.size() >= 4) {
        double acc = 0.0;
        std::size_t count = 0;
        for (std::size_t i = crossings.size() / 2; i + 2 < crossings.size(); ++i) {
            acc += static_cast<double>(crossings[i + 2] - crossings[i]);
            ++count;
        }
        if (count > 0) tu = (acc / static_cast<double>(count)) * dt;
    }
    return {0.45 * ku, 0.54 * ku / tu, 0.0};
}

StrategyDecision select_strategy(const turbulence::TurbulenceParams& t,
                                 const turbulence::BeamGeometry& b,
                                 const channel::LinkConfig& link,
                                 double max_receiver_comp_range_m) {
    StrategyDecision d;
    d.max_receiver_comp_range_m = max_receiver_comp_range_m;
    d.aperture_ratio =
        turbulence::aperture_ratio(t, b, link.range_m, link.rx_aperture_diameter_m);
    try {
        const auto boundary =
            turbulence::boundary_distance(t, b, link.rx_aperture_diameter_m);
        d.boundary_distance_m = boundary.distance_m;
        d.boundary_saturated = boundary.saturated;
    } catch (const std::domain_error&) {
        d.boundary_distance_m = 0.0; // spot already larger than the aperture at launch
        d.boundary_saturated = false;
    }

    const bool spot_fits = d.aperture_ratio >= 1.0;
    const bool range_ok = link.range_m <= max_receiver_comp_range_m;
    if (spot_fits && range_ok) {
        d.strategy = CompensationStrategy::ReceiverCompensation;
        d.reason = "long-term spot fits the receiver aperture within the range limit";
    } else {
        d.strategy = CompensationStrategy::EmitterPreCompensation;
        if (!spot_fits) {
            d.reason = "long-term beam diameter exceeds the receiver aperture";
        } else {
            d.reason = "range exceeds the receiver-compensation limit";
        }
    }
    return d;
}

} // namespace fsqkd::tracking
