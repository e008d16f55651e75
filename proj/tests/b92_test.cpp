#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "fsqkd/b92.hpp"

using namespace fsqkd;
using doctest::Approx;

namespace {

b92::PulseSource ideal_source() {
    b92::PulseSource s;
    s.extinction_ratio_db = std::numeric_limits<double>::infinity();
    return s;
}

b92::DetectorModel quiet_detector() {
    b92::DetectorModel d;
    d.dark_count_rate_hz = 0.0;
    d.dead_time_s = 0.0;
    return d;
}

} // namespace

TEST_CASE("alice_generate: determinism, balance, domain") {
    const auto a = b92::alice_generate(4, 123);
    const auto b = b92::alice_generate(4, 123);
    CHECK(a == b);
    CHECK(b92::alice_generate(4, 124) != a);

    const auto one = b92::alice_generate(1, 9);
    CHECK(one.size() == 1);
    CHECK(one[0] <= 1);

    const auto big = b92::alice_generate(1'000'000, 77);
    const auto ones = static_cast<double>(std::count(big.begin(), big.end(), 1));
    CHECK(ones / 1e6 == Approx(0.5).epsilon(0.004)); // 4 sigma of a fair coin

    CHECK_THROWS_AS(b92::alice_generate(0, 1), std::domain_error);
}

TEST_CASE("channel_detect: dark link produces nothing") {
    const auto bits = b92::alice_generate(10'000, 5);
    const auto recs =
        b92::channel_detect(bits, 0.0, 0.0, quiet_detector(), ideal_source(), {}, 6);
    CHECK(recs.empty());
}

TEST_CASE("channel_detect: extinction identity blocks the crossed arm") {
    // All slots carry state 0; arm 1 sits behind a polarizer orthogonal to it.
    std::vector<std::uint8_t> bits(50'000, 0);
    const auto recs = b92::channel_detect(bits, 1.0, 0.0, quiet_detector(), ideal_source(), {}, 8);
    CHECK(!recs.empty());
    for (const auto& r : recs) CHECK(r.channel == 0);
}

TEST_CASE("channel_detect: faded slots pass nothing") {
    const auto bits = b92::alice_generate(20'000, 3);
    std::vector<std::uint8_t> blocked(bits.size(), 0);
    const auto recs =
        b92::channel_detect(bits, 1.0, 0.0, quiet_detector(), ideal_source(), blocked, 4);
    CHECK(recs.empty());
    CHECK_THROWS_AS(b92::channel_detect(bits, 1.0, 0.0, quiet_detector(), ideal_source(),
                                        std::vector<std::uint8_t>(7, 1), 4),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        b92::channel_detect(bits, 1.5, 0.0, quiet_detector(), ideal_source(), {}, 4),
        std::domain_error);
}

TEST_CASE("channel_detect: small-mu conclusive rate matches the analytic value") {
    const std::uint64_t n = 1'000'000;
    b92::PulseSource src = ideal_source();
    b92::DetectorModel det = quiet_detector();
    const double transmittance = 0.1;
    const auto bits = b92::alice_generate(n, 21);
    const auto recs = b92::channel_detect(bits, transmittance, 0.0, det, src, {}, 22);
    const auto pairs = b92::sift(bits, recs);

    const double p = src.mu * transmittance * det.efficiency / 4.0;
    const double sigma = std::sqrt(p * (1.0 - p) * static_cast<double>(n));
    CHECK(std::abs(static_cast<double>(pairs.size()) - p * static_cast<double>(n)) <=
          3.0 * sigma);
    // Ideal optics and a silent receiver: every conclusive bit agrees.
    for (const auto& pr : pairs) CHECK(pr.alice_bit == pr.bob_bit);
}

TEST_CASE("channel_detect: extinction leakage reproduces the thinned-Poisson QBER") {
    const std::uint64_t n = 2'000'000;
    b92::PulseSource src;
    src.extinction_ratio_db = 20.0; // leak 1e-2
    b92::DetectorModel det = quiet_detector();
    const double transmittance = 0.2;

    const auto bits = b92::alice_generate(n, 31);
    const auto recs = b92::channel_detect(bits, transmittance, 0.0, det, src, {}, 32);
    const auto pairs = b92::sift(bits, recs);
    const auto estimate = b92::qber(pairs);

    // Independent route: Poisson thinning of the photon stream into the two
    // analyser arms, then conditional click algebra.
    const double leak = 1e-2;
    const double flux = src.mu * transmittance * det.efficiency;
    const double lambda_same = flux * 0.5 * (0.5 + leak * 0.5);
    const double lambda_cross = flux * 0.5 * leak;
    const double a = -std::expm1(-lambda_same);
    const double c = -std::expm1(-lambda_cross);
    const double p_conclusive = a * (1.0 - c) + c * (1.0 - a);
    const double q_expected = c * (1.0 - a) / p_conclusive;

    const double n_conc = static_cast<double>(pairs.size());
    const double sigma_conc =
        std::sqrt(p_conclusive * (1.0 - p_conclusive) * static_cast<double>(n));
    CHECK(std::abs(n_conc - p_conclusive * static_cast<double>(n)) <= 3.0 * sigma_conc);

    REQUIRE(estimate.valid);
    const double sigma_q = std::sqrt(q_expected * (1.0 - q_expected) / n_conc);
    CHECK(std::abs(estimate.value - q_expected) <= 3.0 * sigma_q);
}

TEST_CASE("channel_detect: noise-only QBER sits at one half") {
    const std::uint64_t n = 2'000'000;
    b92::PulseSource src = ideal_source();
    b92::DetectorModel det = quiet_detector();
    const double background_hz = 2e6; // per-arm click prob 1e-3 per gate
    const auto bits = b92::alice_generate(n, 41);
    const auto recs = b92::channel_detect(bits, 0.0, background_hz, det, src, {}, 42);
    const auto pairs = b92::sift(bits, recs);
    const auto estimate = b92::qber(pairs);
    REQUIRE(estimate.valid);
    const double sigma = std::sqrt(0.25 / static_cast<double>(pairs.size()));
    CHECK(std::abs(estimate.value - 0.5) <= 3.0 * sigma);
}

TEST_CASE("channel_detect: dead time enforces per-detector spacing") {
    b92::PulseSource src = ideal_source();
    src.mu = 5.0; // click almost every slot
    b92::DetectorModel det = quiet_detector();
    det.dead_time_s = 10e-9; // ten slots at 1 GHz
    const auto bits = b92::alice_generate(20'000, 51);
    const auto recs = b92::channel_detect(bits, 1.0, 0.0, det, src, {}, 52);
    CHECK(!recs.empty());
    std::uint64_t last[2] = {~0ull, ~0ull};
    for (const auto& r : recs) {
        if (last[r.channel] != ~0ull) CHECK(r.slot - last[r.channel] >= 10);
        last[r.channel] = r.slot;
    }
    // Removing the dead time can only add clicks.
    const auto free_recs = b92::channel_detect(bits, 1.0, 0.0, quiet_detector(), src, {}, 52);
    CHECK(free_recs.size() >= recs.size());
}

TEST_CASE("channel_detect: slot-keyed draws make results partition-independent") {
    // The records of a long (internally chunk-parallel) run restricted to the
    // first slots must equal a short run over just those slots: per-slot
    // streams plus a prefix-closed dead-time pass guarantee it.
    b92::PulseSource src;
    b92::DetectorModel det;
    const std::uint64_t n_long = 2'500'000; // above the parallel-chunk threshold
    const std::uint64_t n_short = 100'000;
    const auto bits = b92::alice_generate(n_long, 61);
    const auto long_recs = b92::channel_detect(bits, 0.3, 1e5, det, src, {}, 62);
    const auto short_recs = b92::channel_detect(
        std::span<const std::uint8_t>(bits.data(), n_short), 0.3, 1e5, det, src, {}, 62);

    std::size_t i = 0;
    while (i < long_recs.size() && long_recs[i].slot < n_short) ++i;
    REQUIRE(i == short_recs.size());
    for (std::size_t j = 0; j < i; ++j) {
        CHECK(long_recs[j].slot == short_recs[j].slot);
        CHECK(long_recs[j].channel == short_recs[j].channel);
    }
}

TEST_CASE("sift: protocol mapping and double-click discard") {
    std::vector<std::uint8_t> bits = {1, 0, 1, 1};
    CHECK(b92::sift(bits, {}).empty());

    std::vector<b92::DetectionRecord> recs = {{0, 1}, {2, 0}, {3, 0}, {3, 1}};
    const auto pairs = b92::sift(bits, recs);
    REQUIRE(pairs.size() == 2); // slot 3 had both arms click
    CHECK(pairs[0].alice_bit == 1);
    CHECK(pairs[0].bob_bit == 1);
    CHECK(pairs[1].alice_bit == 1);
    CHECK(pairs[1].bob_bit == 0);

    std::vector<b92::DetectionRecord> bad = {{9, 0}};
    CHECK_THROWS_AS(b92::sift(bits, bad), std::invalid_argument);
}

TEST_CASE("qber: threshold is strictly greater-than eight percent") {
    auto make_pairs = [](int errors, int total) {
        std::vector<b92::SiftedPair> pairs;
        for (int i = 0; i < total; ++i) {
            const auto bob = static_cast<std::uint8_t>(i < errors ? 1 : 0);
            pairs.push_back({0, bob});
        }
        return pairs;
    };

    const auto agree = b92::qber(make_pairs(0, 50));
    CHECK(agree.valid);
    CHECK(agree.value == 0.0);
    CHECK_FALSE(agree.abort);

    const auto at_threshold = b92::qber(make_pairs(8, 100));
    CHECK(at_threshold.value == 0.08);
    CHECK_FALSE(at_threshold.abort);

    const auto above = b92::qber(make_pairs(9, 100));
    CHECK(above.value == 0.09);
    CHECK(above.abort);

    const auto empty = b92::qber({});
    CHECK_FALSE(empty.valid);
    CHECK_FALSE(empty.abort);
    CHECK(std::isnan(empty.value));
}

TEST_CASE("binary entropy") {
    CHECK(b92::binary_entropy(0.0) == 0.0);
    CHECK(b92::binary_entropy(1.0) == 0.0);
    CHECK(b92::binary_entropy(0.5) == 1.0);
    CHECK(b92::binary_entropy(0.11) == Approx(0.499915958164528).epsilon(1e-12));
    CHECK_THROWS_AS(b92::binary_entropy(-0.1), std::domain_error);
    CHECK_THROWS_AS(b92::binary_entropy(1.1), std::domain_error);
}

TEST_CASE("secret key rate") {
    CHECK(b92::secret_key_rate(2e6, 0.0) == 2e6);
    CHECK(b92::secret_key_rate(2e6, 0.5) == 0.0);
    CHECK(b92::secret_key_rate(2e6, 0.03) == Approx(1144675.8255410648).epsilon(1e-12));
    CHECK_THROWS_AS(b92::secret_key_rate(2e6, 0.6), std::domain_error);
    CHECK_THROWS_AS(b92::secret_key_rate(2e6, -0.01), std::domain_error);
}

TEST_CASE("run_protocol: determinism and conservation") {
    b92::PulseSource src;
    b92::DetectorModel det;
    const auto s1 = b92::run_protocol(src, det, 0.4, 1e4, {}, 500'000, 99);
    const auto s2 = b92::run_protocol(src, det, 0.4, 1e4, {}, 500'000, 99);
    CHECK(s1.conclusive_count == s2.conclusive_count);
    CHECK(s1.error_count == s2.error_count);
    CHECK(s1.qber == s2.qber);
    CHECK(s1.sifted_rate_bps == s2.sifted_rate_bps);
    CHECK(s1.secret_key_rate_bps == s2.secret_key_rate_bps);

    CHECK(s1.conclusive_count <= s1.slots_sent);
    CHECK(s1.secret_key_rate_bps <= s1.sifted_rate_bps);
    CHECK(s1.error_count <= s1.conclusive_count);
}

TEST_CASE("run_protocol: background monotonicity under paired seeds") {
    b92::PulseSource src;
    b92::DetectorModel det;
    double prev_qber = -1.0;
    double prev_skr = std::numeric_limits<double>::infinity();
    for (double bg : {1e3, 1e6, 2e7}) {
        const auto s = b92::run_protocol(src, det, 0.3, bg, {}, 1'000'000, 1234);
        REQUIRE(s.qber_valid);
        CHECK(s.qber >= prev_qber);
        CHECK(s.secret_key_rate_bps <= prev_skr);
        prev_qber = s.qber;
        prev_skr = s.secret_key_rate_bps;
    }
}
