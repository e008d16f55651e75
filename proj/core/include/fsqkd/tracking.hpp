#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fsqkd/channel.hpp"
#include "fsqkd/turbulence.hpp"

namespace fsqkd::tracking {

/// First-order Gauss-Markov beam-wander process, one independent stream per
/// axis. rms is the per-axis stationary standard deviation (displacement at
/// the receiver plane, or an angle; the loop is unit-agnostic) and
/// bandwidth_hz the 3 dB corner of the Lorentzian spectrum.
struct WanderProcess {
    double rms = 0.0;
    double bandwidth_hz = 100.0;
    double sample_rate_hz = 10e3; // must be >= 10x bandwidth_hz
    double duration_s = 1.0;
    std::uint64_t seed = 0;
};

/// Two-axis time series with its sample period.
struct TwoAxisSeries {
    std::vector<double> x;
    std::vector<double> y;
    double dt = 0.0;

    std::size_t size() const { return x.size(); }
    double duration_s() const { return static_cast<double>(x.size()) * dt; }
};

struct PidGains {
    double kp = 0.0;
    double ki = 0.0;
    double kd = 0.0;
};

enum class CompensationStrategy {
    ReceiverCompensation,
    EmitterPreCompensation,
};

const char* to_string(CompensationStrategy s);

/// PSD -> PID -> FSM loop parameters. For emitter pre-compensation the loop
/// steers against a tracking-channel measurement that decorrelates from the
/// forward path over the round trip: correlation rho =
/// exp(-round_trip_delay_s / atmospheric_coherence_time_s).
struct TrackingLoopConfig {
    PidGains pid{};
    double loop_rate_hz = 10e3;
    double psd_noise_rms = 1e-6;
    double fsm_bandwidth_hz = 1e3;
    double fsm_range = 0.2;        // actuator saturation, same units as wander
    double fsm_slew_limit = 200.0; // units per second
    CompensationStrategy compensation = CompensationStrategy::ReceiverCompensation;
    double atmospheric_coherence_time_s = 1e-3;
    double round_trip_delay_s = 0.0; // 0 = derive from link range when used
};

struct LoopResult {
    TwoAxisSeries wander;   // disturbance as the loop saw it (loop-rate samples)
    TwoAxisSeries residual; // pointing error after correction
    double rms_residual = 0.0;
    double rms_open_loop = 0.0;
    double rejection_db = 0.0; // 20 log10(open / closed), 0 when undefined
    double saturation_fraction = 0.0;
    bool diverged = false; // residual rms exceeded 10x the open-loop rms
    WanderProcess process; // config echo, for provenance
    TrackingLoopConfig loop;
};

struct FadeMask {
    std::vector<std::uint8_t> pass; // 1 = slot usable
    double availability = 1.0;
};

struct StrategyDecision {
    CompensationStrategy strategy = CompensationStrategy::ReceiverCompensation;
    double aperture_ratio = 0.0;
    double boundary_distance_m = 0.0;
    bool boundary_saturated = false;
    double max_receiver_comp_range_m = 0.0;
    std::string reason;
};

/// AR(1) discretization of an Ornstein-Uhlenbeck process per axis:
/// phi = exp(-2 pi bandwidth / sample_rate), innovation rms * sqrt(1 - phi^2),
/// started from the stationary distribution. Deterministic per seed.
TwoAxisSeries generate_wander(const WanderProcess& p);

struct PidState {
    double integral = 0.0;
    double prev_error = 0.0;
};

/// One PID update: rectangular integral, backward-difference derivative.
/// freeze_integrator implements anti-windup while the actuator saturates.
double pid_step(PidState& s, const PidGains& g, double error, double dt,
                bool freeze_integrator = false);

struct FsmState {
    double position = 0.0;
    double velocity = 0.0;
    bool saturated = false; // range clamp engaged on the last step
};

/// Critically damped second-order step toward `command` (exact discretization
/// at natural frequency 2 pi fsm_bandwidth_hz), then slew-limited and
/// range-clamped.
void fsm_step(FsmState& s, const TrackingLoopConfig& c, double command, double dt);

/// Closed-loop run over the process duration. Per tick: the PSD measures
/// (wander - mirror) plus Gaussian noise, the PID commands the FSM, the FSM
/// moves, and the residual (true wander - mirror) is recorded. Unstable gains
/// are not an error; divergence is reported in the result.
LoopResult closed_loop_sim(const WanderProcess& p, const TrackingLoopConfig& c);

/// Zero-order-hold resampling of the residual onto protocol slots: a slot is
/// faded when the radial displacement exceeds capture_radius.
FadeMask residual_to_fade_mask(const TwoAxisSeries& residual, double capture_radius,
                               double slot_rate_hz);

/// Continuous-cycling tuning recipe: with I and D off, find the ultimate
/// proportional gain Ku at which a constant-disturbance loop stops decaying
/// (bisection on a noiseless, unclamped plant), measure the oscillation
/// period Tu there, and apply the classic PI table kp = 0.45 Ku,
/// ki = 0.54 Ku / Tu. Derivative is left at zero so PSD noise is not
/// amplified. Deterministic.
PidGains tune_pid(const TrackingLoopConfig& c);

/// Pick the compensation side: receiver compensation requires the received
/// long-term spot to fit inside the aperture (ratio >= 1) and the range to
/// stay within the round-trip-correlation limit.
StrategyDecision select_strategy(const turbulence::TurbulenceParams& t,
                                 const turbulence::BeamGeometry& b,
                                 const channel::LinkConfig& link,
                                 double max_receiver_comp_range_m = 3000.0);

} // namespace fsqkd::tracking
