#include <cmath>

#include <doctest.h>

#include "pcdc/metrics.hpp"
#include "test_support.hpp"

using namespace pcdc;

TEST_CASE("raw rate boundaries") {
    CHECK(raw_rate(336000000ull, 1000000000ull) == doctest::Approx(0.336).epsilon(1e-12));
    CHECK(raw_rate(12345, 12345) == 1.0);           // no compression happening
    CHECK(raw_rate(1100, 1000) == doctest::Approx(1.1).epsilon(1e-12));  // failed compression
    CHECK_THROWS_AS(raw_rate(1, 0), ConfigError);
}

TEST_CASE("adjusted rate accounts for the model") {
    CHECK(adjusted_rate(93000000ull, 463000000ull, 1000000000ull) ==
          doctest::Approx(0.556).epsilon(1e-12));
    CHECK(adjusted_rate(129000000ull, 51000000ull, 1000000000ull) ==
          doctest::Approx(0.180).epsilon(1e-12));
    CHECK(adjusted_rate(500, 0, 1000) == raw_rate(500, 1000));
    CHECK_THROWS_AS(adjusted_rate(1, 1, 0), ConfigError);
}

TEST_CASE("gamma_a dominates gamma_r, with equality only at zero model bytes") {
    SplitMix64 rng(0x3e7);
    for (int i = 0; i < 1000; ++i) {
        uint64_t original = 1 + rng.below(1u << 30);
        uint64_t compressed = rng.below(original * 2);
        uint64_t model = rng.below(2) ? 0 : rng.below(1u << 28);
        CompressionReport r = CompressionReport::make("c", "m", original, compressed, model);
        CHECK(r.gamma_a >= r.gamma_r);
        CHECK((r.gamma_a == r.gamma_r) == (model == 0));
        CHECK(r.bits_per_byte == doctest::Approx(8.0 * r.gamma_r).epsilon(1e-12));
    }
}

TEST_CASE("report serialization roundtrips and rates recompute exactly") {
    CompressionReport r =
        CompressionReport::make("text_en", "ac:k3:int", 1048576, 331776, 12000);
    CompressionReport back = CompressionReport::from_json(r.to_json());
    CHECK(back.corpus_id == r.corpus_id);
    CHECK(back.method_id == r.method_id);
    CHECK(back.original_bytes == r.original_bytes);
    CHECK(back.compressed_bytes == r.compressed_bytes);
    CHECK(back.model_bytes == r.model_bytes);
    CHECK(std::fabs(back.gamma_r - raw_rate(back.compressed_bytes, back.original_bytes)) < 1e-12);
    CHECK(std::fabs(back.gamma_a -
                    adjusted_rate(back.compressed_bytes, back.model_bytes, back.original_bytes)) <
          1e-12);

    CHECK_THROWS_AS(CompressionReport::from_json("{}"), ConfigError);
    CHECK_THROWS_AS(CompressionReport::from_json("not json"), ConfigError);
}

TEST_CASE("csv rows carry every field") {
    CompressionReport r = CompressionReport::make("c1", "huff0", 1000, 600, 0);
    std::string row = r.to_csv_row();
    CHECK(row.find("c1,huff0,1000,600,0,") == 0);
    CHECK(CompressionReport::csv_header().find("gamma_r") != std::string::npos);
}
