#include <cmath>

#include <doctest.h>

#include "pcdc/coder.hpp"
#include "pcdc/predictor.hpp"
#include "test_support.hpp"

using namespace pcdc;

namespace {

Distribution dist_from(std::initializer_list<uint32_t> freqs) {
    std::vector<uint32_t> cum{0};
    for (uint32_t f : freqs) cum.push_back(cum.back() + f);
    return Distribution(std::move(cum));
}

}  // namespace

TEST_CASE("distribution validation") {
    CHECK_THROWS_AS(Distribution({0, 100, 100, 65536}), ConfigError);   // zero-width symbol
    CHECK_THROWS_AS(Distribution({0, 65535}), ConfigError);            // wrong total
    CHECK_THROWS_AS(Distribution({1, 65536}), ConfigError);            // cum[0] != 0
    CHECK_NOTHROW(Distribution({0, 65536}));
    CHECK_NOTHROW(dist_from({32768, 32768}));
}

TEST_CASE("entropy of reference distributions") {
    CHECK(Distribution::uniform(256).entropy_bits() == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(dist_from({32768, 16384, 16384}).entropy_bits() == doctest::Approx(1.5).epsilon(1e-12));
    // One symbol holding all mass minus the floor.
    double h = dist_from({65535, 1}).entropy_bits();
    CHECK(h > 0.0);
    CHECK(h < 0.001);
}

TEST_CASE("uniform binary source costs one bit per symbol") {
    Distribution half = dist_from({32768, 32768});

    // Reference point: an empty message is pure flush.
    Bytes empty_stream = RangeEncoder().finish();
    CHECK(empty_stream.size() == 5);

    RangeEncoder enc;
    for (int i = 0; i < 8; ++i) enc.encode(half, i & 1);
    Bytes coded = enc.finish();
    // The single payload byte rides inside the flushed 32-bit low window,
    // so the stream is still the flush-size five bytes: one payload byte
    // plus four bytes of framing.
    CHECK(coded.size() == 5);
    CHECK(coded.size() <= 1 + RangeEncoder::kMaxFlushBytes);

    RangeDecoder dec(coded);
    for (int i = 0; i < 8; ++i) CHECK(dec.decode(half) == static_cast<uint32_t>(i & 1));
}

TEST_CASE("per-step model distributions narrow onto the message") {
    // Three-symbol alphabet {X, I, A}; a different model distribution at
    // every step. The coded string must reproduce AIXI exactly.
    enum { X = 0, I = 1, A = 2 };
    std::vector<Distribution> steps = {
        dist_from({13107, 13107, 39322}),  // favours A
        dist_from({6554, 45875, 13107}),   // favours I
        dist_from({45875, 13107, 6554}),   // favours X
        dist_from({19661, 26214, 19661}),
    };
    std::vector<uint32_t> message = {A, I, X, I};
    RangeEncoder enc;
    for (size_t i = 0; i < message.size(); ++i) enc.encode(steps[i], message[i]);
    Bytes coded = enc.finish();

    RangeDecoder dec(coded);
    for (size_t i = 0; i < message.size(); ++i) CHECK(dec.decode(steps[i]) == message[i]);
}

TEST_CASE("payload stays within the information content bound") {
    // i.i.d. 0.9/0.1 source; frequencies are the exact fixed-point model.
    Distribution d = dist_from({58982, 6554});
    SplitMix64 rng(0xbea75);
    const size_t n = 10000;

    RangeEncoder enc;
    double info_bits = 0.0;
    for (size_t i = 0; i < n; ++i) {
        uint32_t sym = rng.below(10) == 0 ? 1 : 0;
        info_bits += -std::log2(static_cast<double>(d.freq(sym)) / Distribution::kTotal);
        enc.encode(d, sym);
    }
    Bytes coded = enc.finish();
    double payload_bits = 8.0 * static_cast<double>(coded.size());
    CHECK(payload_bits <= info_bits + 32.0 + 8.0 * RangeEncoder::kMaxFlushBytes);
}

TEST_CASE("single-symbol alphabet needs only the flush") {
    Distribution one = Distribution::uniform(1);
    RangeEncoder enc;
    for (int i = 0; i < 1000; ++i) enc.encode(one, 0);
    Bytes coded = enc.finish();
    CHECK(coded.size() <= RangeEncoder::kMaxFlushBytes);
    RangeDecoder dec(coded);
    for (int i = 0; i < 1000; ++i) CHECK(dec.decode(one) == 0);
}

TEST_CASE("roundtrip under random static distributions") {
    for (uint64_t seed = 0; seed < 1000; ++seed) {
        SplitMix64 rng(0x5eed0000 + seed);
        uint32_t alphabet = 2 + static_cast<uint32_t>(rng.below(60));
        std::vector<uint64_t> counts(alphabet);
        for (auto& c : counts) c = rng.below(1000);
        Distribution d = Distribution::from_counts(counts);

        size_t len = rng.below(200);
        std::vector<uint32_t> message(len);
        for (auto& m : message) m = static_cast<uint32_t>(rng.below(alphabet));

        RangeEncoder enc;
        for (uint32_t sym : message) enc.encode(d, sym);
        Bytes coded = enc.finish();

        RangeDecoder dec(coded);
        for (uint32_t sym : message) REQUIRE(dec.decode(d) == sym);
    }
}

TEST_CASE("roundtrip of random byte strings under an adaptive model") {
    for (uint64_t seed = 0; seed < 64; ++seed) {
        Bytes message = pcdc::test::skewed_bytes(0xada7 + seed, 4096);
        ContextModelConfig cfg;
        cfg.order = 2;
        cfg.capacity_log2 = 14;

        OrderKModel enc_model(cfg, 256);
        RangeEncoder enc;
        for (uint8_t b : message) {
            enc.encode(enc_model.next_distribution(), b);
            enc_model.update(b);
        }
        Bytes coded = enc.finish();

        OrderKModel dec_model(cfg, 256);
        RangeDecoder dec(coded);
        for (uint8_t b : message) {
            uint32_t sym = dec.decode(dec_model.next_distribution());
            REQUIRE(sym == b);
            dec_model.update(sym);
        }
    }
}

TEST_CASE("adaptive payload respects the granularity-corrected bound") {
    // The exact-partition coder loses at most -log2(1 - 2^-8) bits per
    // symbol to interval truncation; the rest of the slack is the framing.
    const double kStepLoss = -std::log2(1.0 - 1.0 / 256.0);
    for (uint64_t seed = 0; seed < 8; ++seed) {
        Bytes message = pcdc::test::skewed_bytes(0xb0b + seed, 8192);
        ContextModelConfig cfg;
        cfg.order = 1;
        cfg.capacity_log2 = 12;
        OrderKModel model(cfg, 256);
        RangeEncoder enc;
        double info_bits = 0.0;
        for (uint8_t b : message) {
            Distribution d = model.next_distribution();
            info_bits += -std::log2(static_cast<double>(d.freq(b)) / Distribution::kTotal);
            enc.encode(d, b);
            model.update(b);
        }
        Bytes coded = enc.finish();
        double bound = info_bits + kStepLoss * static_cast<double>(message.size()) + 32.0 +
                       8.0 * RangeEncoder::kMaxFlushBytes;
        CHECK(8.0 * static_cast<double>(coded.size()) <= bound);
    }
}

TEST_CASE("determinism: identical inputs, identical bytes") {
    Bytes message = pcdc::test::skewed_bytes(0xd0d0, 2048);
    auto run = [&]() {
        ContextModelConfig cfg;
        cfg.order = 2;
        cfg.capacity_log2 = 12;
        OrderKModel model(cfg, 256);
        RangeEncoder enc;
        for (uint8_t b : message) {
            enc.encode(model.next_distribution(), b);
            model.update(b);
        }
        return enc.finish();
    };
    CHECK(run() == run());
}

TEST_CASE("decoder surfaces damage instead of wrapping") {
    Distribution d = Distribution::uniform(16);
    RangeEncoder enc;
    for (int i = 0; i < 64; ++i) enc.encode(d, i % 16);
    Bytes coded = enc.finish();

    SUBCASE("truncated stream") {
        Bytes cut(coded.begin(), coded.begin() + 3);
        CHECK_THROWS_AS(
            [&] {
                RangeDecoder dec(cut);
                for (int i = 0; i < 64; ++i) dec.decode(d);
            }(),
            CorruptStreamError);
    }
    SUBCASE("bad leading byte") {
        Bytes bad = coded;
        bad[0] = 0x55;
        CHECK_THROWS_AS(RangeDecoder{bad}, CorruptStreamError);
    }
    SUBCASE("empty stream") { CHECK_THROWS_AS(RangeDecoder{Bytes{}}, CorruptStreamError); }
}

TEST_CASE("encode validates symbols and distributions") {
    RangeEncoder enc;
    CHECK_THROWS_AS(enc.encode(Distribution::uniform(4), 4), ConfigError);
}
