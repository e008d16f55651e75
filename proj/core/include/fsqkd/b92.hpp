#pragma once

#include <array>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

namespace fsqkd::b92 {

/// Alice's two-state source: attenuated pulses at mean photon number mu,
/// bit b encoded as linear polarization state_angles_rad[b]. The default
/// states are 45 degrees apart, the nonorthogonal pair the protocol needs.
struct PulseSource {
    double clock_rate_hz = 1e9;
    double mu = 0.1;
    std::array<double, 2> state_angles_rad{0.0, std::numbers::pi / 4.0};
    /// Polarizer quality: a crossed polarizer leaks with probability
    /// 10^(-extinction_ratio_db / 10). Use INFINITY for ideal optics.
    double extinction_ratio_db = 30.0;
};

/// Gated single-photon detector (one per analyser arm).
struct DetectorModel {
    double efficiency = 0.5;
    double dark_count_rate_hz = 500.0;
    double dead_time_s = 50e-9;   // non-paralyzable, per detector
    double gate_window_s = 1e-9;
};

/// One detector click. channel is the analyser arm, which doubles as Bob's
/// decoded bit: arm i carries a polarizer orthogonal to state 1-i, so a
/// click there announces state i.
struct DetectionRecord {
    std::uint64_t slot = 0;
    std::uint8_t channel = 0;
};

struct SiftedPair {
    std::uint8_t alice_bit = 0;
    std::uint8_t bob_bit = 0;
};

inline constexpr double kQberAbortThreshold = 0.08;

struct QberEstimate {
    double value = 0.0;   // NaN when valid == false (insufficient data)
    bool valid = false;
    bool abort = false;   // strictly above the threshold
    std::uint64_t errors = 0;
    std::uint64_t pairs = 0;
};

/// Everything measured over one simulated slot window, with rates
/// extrapolated to per-second figures via the source clock.
struct TransmissionStats {
    std::uint64_t slots_sent = 0;
    std::uint64_t conclusive_count = 0;
    std::uint64_t error_count = 0;
    double qber = 0.0;
    bool qber_valid = false;
    bool abort = false;
    double sifted_rate_bps = 0.0;
    double secret_key_rate_bps = 0.0;
    double background_rate_hz = 0.0;
};

/// Uniform random bit per slot; reproducible per seed.
std::vector<std::uint8_t> alice_generate(std::uint64_t n_slots, std::uint64_t seed);

/// Photon-level Monte Carlo of the channel and the dual-arm receiver.
///
/// Per slot: photon number ~ Poisson(mu); each photon survives with
/// probability transmittance * efficiency (zero in faded slots), is routed
/// 50/50, and passes arm i's polarizer with probability
/// cos^2(delta) + leak * sin^2(delta) where delta is the angle to the
/// polarizer axis. Dark and background counts are added per arm as
/// Poisson(rate * gate_window); background_rate_hz is the total over both
/// arms and is split equally. A non-paralyzable dead time then suppresses
/// clicks closer than dead_time_s to the previous click on the same detector.
///
/// fade_mask: per-slot pass flag (1 = beam on aperture); empty = all-pass.
/// Draws are keyed per slot, so results do not depend on any internal
/// parallel partitioning.
std::vector<DetectionRecord> channel_detect(std::span<const std::uint8_t> alice_bits,
                                            double transmittance, double background_rate_hz,
                                            const DetectorModel& det, const PulseSource& src,
                                            std::span<const std::uint8_t> fade_mask,
                                            std::uint64_t seed);

/// Keep slots with exactly one clicking arm; arm index is Bob's bit.
/// Slots where both arms clicked are discarded.
std::vector<SiftedPair> sift(std::span<const std::uint8_t> alice_bits,
                             std::span<const DetectionRecord> detections);

/// Error fraction of the sifted key, with the abort flag set strictly above
/// kQberAbortThreshold. Empty input reports invalid (insufficient data), not
/// an abort.
QberEstimate qber(std::span<const SiftedPair> pairs);

/// -p log2 p - (1-p) log2 (1-p), with 0 log 0 = 0.
double binary_entropy(double p);

/// Distillable rate after error correction and privacy amplification,
/// R = sifted * max(0, 1 - (1 + overhead) * h2(qber)). The entropy-penalty
/// form is a modeling choice, flagged in simulation metadata.
double secret_key_rate(double sifted_rate_bps, double qber_value,
                       double error_correction_overhead = 1.2);

/// Full pipeline over one slot window: generate, detect, sift, grade.
/// Sub-seeds derive from `seed` by fixed labels, so results are bit-stable.
TransmissionStats run_protocol(const PulseSource& src, const DetectorModel& det,
                               double transmittance, double background_rate_hz,
                               std::span<const std::uint8_t> fade_mask, std::uint64_t n_slots,
                               std::uint64_t seed);

} // namespace fsqkd::b92
