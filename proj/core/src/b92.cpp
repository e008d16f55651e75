#include "fsqkd/b92.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>
#include <thread>

#include "fsqkd/errors.hpp"
#include "fsqkd/rng.hpp"

namespace fsqkd::b92 {

namespace {

constexpr std::uint64_t kDetectChunkSlots = 1u << 20;

void check_source(const PulseSource& src) {
    check_positive(src.mu, "mu");
    check_positive(src.clock_rate_hz, "clock_rate_hz");
    check_nonnegative(src.extinction_ratio_db, "extinction_ratio_db");
}

void check_detector(const DetectorModel& det) {
    check_unit_interval(det.efficiency, "efficiency");
    check_nonnegative(det.dark_count_rate_hz, "dark_count_rate_hz");
    check_nonnegative(det.dead_time_s, "dead_time_s");
    check_positive(det.gate_window_s, "gate_window_s");
}

struct DetectConstants {
    double survival = 0.0;        // transmittance * detector efficiency
    double pass[2][2]{};          // [alice_bit][arm]
    double p_noise = 0.0;         // per-arm click probability per gate
    double exp_neg_mu = 0.0;
};

// Arm i holds a polarizer orthogonal to state 1-i; a finite extinction
// ratio leaks through the crossed direction.
DetectConstants make_constants(const PulseSource& src, const DetectorModel& det,
                               double transmittance, double background_rate_hz) {
    DetectConstants c;
    c.survival = transmittance * det.efficiency;
    const double leak = std::isinf(src.extinction_ratio_db)
                            ? 0.0
                            : std::pow(10.0, -src.extinction_ratio_db / 10.0);
    for (int bit = 0; bit < 2; ++bit) {
        for (int arm = 0; arm < 2; ++arm) {
            const double axis = src.state_angles_rad[1 - arm] + std::numbers::pi / 2.0;
            const double c2 = std::cos(src.state_angles_rad[bit] - axis);
            const double malus = c2 * c2;
            c.pass[bit][arm] = malus + leak * (1.0 - malus);
        }
    }
    const double per_arm_rate = det.dark_count_rate_hz + 0.5 * background_rate_hz;
    c.p_noise = -std::expm1(-per_arm_rate * det.gate_window_s);
    c.exp_neg_mu = std::exp(-src.mu);
    return c;
}

void detect_range(std::span<const std::uint8_t> bits, std::span<const std::uint8_t> fade_mask,
                  const DetectConstants& c, double mu, std::uint64_t seed, std::uint64_t begin,
                  std::uint64_t end, std::vector<DetectionRecord>& out) {
    for (std::uint64_t slot = begin; slot < end; ++slot) {
        auto st = rng::slot_stream(seed, slot);
        const int photons = st.poisson(mu, c.exp_neg_mu);
        const double p_survive =
            (fade_mask.empty() || fade_mask[slot]) ? c.survival : 0.0;
        const int bit = bits[slot];
        bool hit[2] = {false, false};
        for (int p = 0; p < photons; ++p) {
            if (st.uniform01() >= p_survive) continue;
            const int arm = static_cast<int>(st.next_u64() & 1u);
            if (st.uniform01() < c.pass[bit][arm]) hit[arm] = true;
        }
        // Always consume both noise draws to keep streams aligned across
        // background levels (paired-seed sweeps stay coupled).
        if (st.uniform01() < c.p_noise) hit[0] = true;
        if (st.uniform01() < c.p_noise) hit[1] = true;
        if (hit[0]) out.push_back({slot, 0});
        if (hit[1]) out.push_back({slot, 1});
    }
}

} // namespace

std::vector<std::uint8_t> alice_generate(std::uint64_t n_slots, std::uint64_t seed) {
    if (n_slots == 0) throw std::domain_error("n_slots must be > 0");
    std::vector<std::uint8_t> bits(n_slots);
    rng::Stream st(seed);
    for (auto& b : bits) b = static_cast<std::uint8_t>(st.next_u64() & 1u);
    return bits;
}

std::vector<DetectionRecord> channel_detect(std::span<const std::uint8_t> alice_bits,
                                            double transmittance, double background_rate_hz,
                                            const DetectorModel& det, const PulseSource& src,
                                            std::span<const std::uint8_t> fade_mask,
                                            std::uint64_t seed) {
    check_unit_interval(transmittance, "transmittance");
    check_nonnegative(background_rate_hz, "background_rate_hz");
    check_source(src);
    check_detector(det);
    if (!fade_mask.empty() && fade_mask.size() != alice_bits.size()) {
        throw std::invalid_argument("fade_mask length must equal slot count");
    }

    const auto consts = make_constants(src, det, transmittance, background_rate_hz);
    const std::uint64_t n = alice_bits.size();

    std::vector<DetectionRecord> candidates;
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (n >= 2 * kDetectChunkSlots && hw > 1) {
        const std::uint64_t n_chunks = (n + kDetectChunkSlots - 1) / kDetectChunkSlots;
        std::vector<std::future<std::vector<DetectionRecord>>> futures;
        futures.reserve(n_chunks);
        for (std::uint64_t chunk = 0; chunk < n_chunks; ++chunk) {
            const std::uint64_t lo = chunk * kDetectChunkSlots;
            const std::uint64_t hi = std::min(n, lo + kDetectChunkSlots);
            futures.push_back(std::async(std::launch::async, [&, lo, hi] {
                std::vector<DetectionRecord> part;
                detect_range(alice_bits, fade_mask, consts, src.mu, seed, lo, hi, part);
                return part;
            }));
        }
        for (auto& f : futures) {
            auto part = f.get();
            candidates.insert(candidates.end(), part.begin(), part.end());
        }
    } else {
        detect_range(alice_bits, fade_mask, consts, src.mu, seed, 0, n, candidates);
    }

    // Sequential dead-time pass over the (sparse) click list keeps the result
    // independent of the chunk decomposition above.
    std::vector<DetectionRecord> kept;
    kept.reserve(candidates.size());
    const double slot_period = 1.0 / src.clock_rate_hz;
    double last_click[2] = {-std::numeric_limits<double>::infinity(),
                            -std::numeric_limits<double>::infinity()};
    for (const auto& rec : candidates) {
        const double t = static_cast<double>(rec.slot) * slot_period;
        if (t - last_click[rec.channel] < det.dead_time_s) continue;
        kept.push_back(rec);
        last_click[rec.channel] = t;
    }
    return kept;
}

std::vector<SiftedPair> sift(std::span<const std::uint8_t> alice_bits,
                             std::span<const DetectionRecord> detections) {
    std::vector<SiftedPair> pairs;
    std::size_t i = 0;
    while (i < detections.size()) {
        std::size_t j = i;
        while (j < detections.size() && detections[j].slot == detections[i].slot) ++j;
        if (j - i == 1) {
            const auto& rec = detections[i];
            if (rec.slot >= alice_bits.size()) {
                throw std::invalid_argument("detection references a slot beyond the sequence");
            }
            pairs.push_back({alice_bits[rec.slot], rec.channel});
        }
        i = j;
    }
    return pairs;
}

QberEstimate qber(std::span<const SiftedPair> pairs) {
    QberEstimate q;
    q.pairs = pairs.size();
    for (const auto& p : pairs) {
        if (p.alice_bit != p.bob_bit) ++q.errors;
    }
    if (q.pairs == 0) {
        q.value = std::numeric_limits<double>::quiet_NaN();
        return q; // insufficient data: not valid, no abort
    }
    q.valid = true;
    q.value = static_cast<double>(q.errors) / static_cast<double>(q.pairs);
    q.abort = q.value > kQberAbortThreshold;
    return q;
}

double binary_entropy(double p) {
    check_unit_interval(p, "p");
    if (p == 0.0 || p == 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double secret_key_rate(double sifted_rate_bps, double qber_value,
                       double error_correction_overhead) {
    check_nonnegative(sifted_rate_bps, "sifted_rate_bps");
    if (!(qber_value >= 0.0 && qber_value <= 0.5)) {
        throw std::domain_error("qber must be in [0, 0.5]");
    }
    const double margin = 1.0 - (1.0 + error_correction_overhead) * binary_entropy(qber_value);
    return sifted_rate_bps * std::max(0.0, margin);
}

TransmissionStats run_protocol(const PulseSource& src, const DetectorModel& det,
                               double transmittance, double background_rate_hz,
                               std::span<const std::uint8_t> fade_mask, std::uint64_t n_slots,
                               std::uint64_t seed) {
    const auto bits = alice_generate(n_slots, rng::derive_seed(seed, "alice"));
    const auto detections = channel_detect(bits, transmittance, background_rate_hz, det, src,
                                           fade_mask, rng::derive_seed(seed, "detect"));
    const auto pairs = sift(bits, detections);
    const auto q = qber(pairs);

    TransmissionStats s;
    s.slots_sent = n_slots;
    s.conclusive_count = pairs.size();
    s.error_count = q.errors;
    s.qber = q.value;
    s.qber_valid = q.valid;
    s.abort = q.abort;
    const double window_s = static_cast<double>(n_slots) / src.clock_rate_hz;
    s.sifted_rate_bps = static_cast<double>(pairs.size()) / window_s;
    s.secret_key_rate_bps = (q.valid && !q.abort && q.value <= 0.5)
                                ? secret_key_rate(s.sifted_rate_bps, q.value)
                                : 0.0;
    s.background_rate_hz = background_rate_hz;
    return s;
}

} // namespace fsqkd::b92
