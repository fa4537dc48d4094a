#include <cmath>

#include <doctest.h>

#include "pcdc/histogram.hpp"
#include "pcdc/quant.hpp"
#include "pcdc/quant_eval.hpp"
#include "pcdc/synth.hpp"
#include "test_support.hpp"

using namespace pcdc;

namespace {

WeightMatrix gaussian_matrix(size_t rows, size_t cols, uint64_t seed) {
    SplitMix64 rng(seed);
    WeightMatrix m = WeightMatrix::zeros(rows, cols);
    for (double& v : m.data) v = rng.gaussian();
    return m;
}

WeightMatrix with_outliers(size_t rows, size_t cols, uint64_t seed, double magnitude = 12.0) {
    SplitMix64 rng(seed);
    WeightMatrix m = gaussian_matrix(rows, cols, seed ^ 0xabcdef);
    size_t n_out = std::max<size_t>(1, m.data.size() / 100);  // 1% heavy tails
    for (size_t i = 0; i < n_out; ++i) {
        size_t idx = rng.below(m.data.size());
        m.data[idx] = (rng.below(2) ? magnitude : -magnitude) * (1.0 + rng.unit());
    }
    return m;
}

// Calibration with X X^T proportional to the identity, built exactly:
// the first `dim` sample columns form c * I, the rest are zero.
WeightMatrix scaled_orthonormal_calibration(size_t dim, size_t samples, double c) {
    WeightMatrix x = WeightMatrix::zeros(dim, samples);
    for (size_t i = 0; i < dim; ++i) x.at(i, i) = c;
    return x;
}

bool same_quantization(const QuantizedMatrix& a, const QuantizedMatrix& b) {
    return a.codes == b.codes && a.scale == b.scale && a.zero == b.zero && a.bits == b.bits;
}

}  // namespace

TEST_CASE("rtn is exact on grid points") {
    // Integer-valued weights spanning [0, 2^b - 1] give s = 1, z = 0.
    QuantGrid grid{4, 16};
    SplitMix64 rng(0x9d);
    WeightMatrix w = WeightMatrix::zeros(4, 16);
    for (size_t r = 0; r < w.rows; ++r) {
        w.at(r, 0) = 0;
        w.at(r, 1) = 15;
        for (size_t c = 2; c < w.cols; ++c) w.at(r, c) = static_cast<double>(rng.below(16));
    }
    QuantizedMatrix q = rtn_quantize(w, grid);
    WeightMatrix back = q.dequantize();
    for (size_t i = 0; i < w.data.size(); ++i) CHECK(back.data[i] == w.data[i]);
}

TEST_CASE("rtn elementwise error stays within half a step") {
    QuantGrid grid{8, 2};
    WeightMatrix w = WeightMatrix::zeros(1, 2);
    w.at(0, 0) = -1.0;
    w.at(0, 1) = 1.0;
    QuantizedMatrix q = rtn_quantize(w, grid);
    double s = (1.0 - (-1.0)) / 255.0;
    WeightMatrix back = q.dequantize();
    for (size_t i = 0; i < 2; ++i) CHECK(std::fabs(back.data[i] - w.data[i]) <= s / 2 + 1e-15);

    for (uint64_t seed = 0; seed < 50; ++seed) {
        WeightMatrix m = gaussian_matrix(8, 64, 0xeeee + seed);
        QuantGrid g{static_cast<uint32_t>(seed % 2 ? 3 : 4), 16};
        QuantizedMatrix qq = rtn_quantize(m, g);
        size_t gpr = qq.groups_per_row();
        for (size_t r = 0; r < m.rows; ++r) {
            for (size_t c = 0; c < m.cols; ++c) {
                double s_rc = qq.scale[r * gpr + c / g.group_size];
                REQUIRE(std::fabs(qq.dequant_at(r, c) - m.at(r, c)) <= s_rc / 2 + 1e-12);
            }
        }
    }
}

TEST_CASE("rtn matches the exhaustive per-element oracle") {
    WeightMatrix w = gaussian_matrix(64, 64, 0x0a11);
    QuantGrid grid{4, 64};
    QuantizedMatrix q = rtn_quantize(w, grid);
    size_t gpr = q.groups_per_row();
    for (size_t r = 0; r < w.rows; ++r) {
        for (size_t c = 0; c < w.cols; ++c) {
            size_t g = r * gpr + c / grid.group_size;
            double s = q.scale[g], z = q.zero[g];
            uint8_t best = 0;
            double best_err = 1e300;
            for (uint32_t code = 0; code <= grid.max_code(); ++code) {
                double err = std::fabs(w.at(r, c) - s * (code - z));
                if (err < best_err) {
                    best_err = err;
                    best = static_cast<uint8_t>(code);
                }
            }
            REQUIRE(q.codes[r * w.cols + c] == best);
        }
    }
}

TEST_CASE("constant groups reconstruct exactly") {
    QuantGrid grid{2, 8};
    WeightMatrix w = WeightMatrix::zeros(2, 8);
    for (size_t c = 0; c < 8; ++c) {
        w.at(0, c) = 3.25;
        w.at(1, c) = -7.5;
    }
    QuantizedMatrix q = rtn_quantize(w, grid);
    WeightMatrix back = q.dequantize();
    for (size_t i = 0; i < w.data.size(); ++i) CHECK(back.data[i] == w.data[i]);
}

TEST_CASE("non-finite weights are rejected") {
    WeightMatrix w = WeightMatrix::zeros(2, 2);
    w.at(0, 0) = std::nan("");
    QuantGrid ok_grid{4, 2};
    CHECK_THROWS_AS(rtn_quantize(w, ok_grid), ConfigError);
    QuantGrid bad_grid{5, 2};
    CHECK_THROWS_AS(bad_grid.validate(), ConfigError);
}

TEST_CASE("gptq degenerates to rtn when the hessian is proportional to I") {
    WeightMatrix w = gaussian_matrix(32, 32, 0x1d1d);
    WeightMatrix x = scaled_orthonormal_calibration(32, 256, 3.0);
    QuantGrid grid{3, 64};
    QuantizedMatrix gptq = gptq_quantize(w, x, GptqConfig{grid, 8, 0.01});
    QuantizedMatrix rtn = rtn_quantize(w, grid);
    CHECK(same_quantization(gptq, rtn));
}

TEST_CASE("gptq beats rtn on the activation objective almost always") {
    int wins = 0;
    const int trials = 50;
    for (int t = 0; t < trials; ++t) {
        WeightMatrix w = gaussian_matrix(32, 32, 0x6b70 + t);
        WeightMatrix x = gaussian_matrix(32, 256, 0xca0 + t);
        QuantGrid grid{3, 64};
        QuantizedMatrix gq = gptq_quantize(w, x, GptqConfig{grid, 8, 0.01});
        QuantizedMatrix rq = rtn_quantize(w, grid);
        double ge = activation_error(w, gq.dequantize(), x);
        double re = activation_error(w, rq.dequantize(), x);
        if (ge <= re) ++wins;
    }
    CHECK(wins >= trials * 95 / 100);
}

TEST_CASE("gptq matches the brute-force error-feedback oracle on 2x2") {
    for (int t = 0; t < 100; ++t) {
        WeightMatrix w = gaussian_matrix(2, 2, 0x2b2b + t);
        WeightMatrix x = gaussian_matrix(2, 16, 0x3c3c + t);
        QuantGrid grid{2, 64};
        GptqConfig cfg{grid, 1, 0.01};
        QuantizedMatrix got = gptq_quantize(w, x, cfg);

        // Oracle: same feedback matrix semantics, but candidate codes are
        // found by exhaustive search instead of rounding. Since H^{-1} is
        // SPD, recompute U from scratch with a tiny dense routine.
        // U is validated separately by the degenerate and statistical
        // tests; here we reuse the library's U via a 1-row trick: run the
        // library on a single-row copy to extract per-column behaviour.
        // Instead, replicate the sweep directly with enumeration.
        // Feedback matrix: pull it out by running gptq on an all-zero
        // matrix is not possible, so recompute H = 2XX^T + lambda I and
        // factor it here.
        size_t n = 2;
        std::vector<double> h(n * n, 0.0);
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) {
                double s = 0.0;
                for (size_t k = 0; k < x.cols; ++k) s += x.at(i, k) * x.at(j, k);
                h[i * n + j] = 2.0 * s;
            }
        double lambda = cfg.damping * (h[0] + h[3]) / 2.0;
        h[0] += lambda;
        h[3] += lambda;
        // 2x2 inverse.
        double det = h[0] * h[3] - h[1] * h[2];
        double inv[4] = {h[3] / det, -h[1] / det, -h[2] / det, h[0] / det};
        // Cholesky of the inverse (lower), then transpose to upper U.
        double l00 = std::sqrt(inv[0]);
        double l10 = inv[2] / l00;
        double l11 = std::sqrt(inv[3] - l10 * l10);
        double u[4] = {l00, l10, 0.0, l11};  // row-major upper triangular

        // Grids per row from the original weights (one group spans the row).
        QuantizedMatrix want;
        want.rows = 2;
        want.cols = 2;
        want.bits = grid.bits;
        want.group_size = grid.group_size;
        want.codes.assign(4, 0);
        want.scale.assign(2, 1.0);
        want.zero.assign(2, 0.0);
        WeightMatrix cur = w;
        for (size_t r = 0; r < 2; ++r) {
            double lo = std::min(w.at(r, 0), w.at(r, 1));
            double hi = std::max(w.at(r, 0), w.at(r, 1));
            double s = (hi == lo) ? 1.0 : (hi - lo) / 3.0;
            want.scale[r] = s;
            want.zero[r] = (hi == lo) ? -lo : -lo / s;
        }
        for (size_t j = 0; j < 2; ++j) {
            for (size_t r = 0; r < 2; ++r) {
                double s = want.scale[r], z = want.zero[r];
                uint8_t best = 0;
                double best_err = 1e300;
                for (uint32_t code = 0; code <= 3; ++code) {
                    double err = std::fabs(cur.at(r, j) - s * (code - z));
                    if (err < best_err) {
                        best_err = err;
                        best = static_cast<uint8_t>(code);
                    }
                }
                want.codes[r * 2 + j] = best;
                double dq = s * (best - z);
                double e = (cur.at(r, j) - dq) / u[j * 2 + j];
                cur.at(r, j) -= e * u[j * 2 + j];
                for (size_t c = j + 1; c < 2; ++c) cur.at(r, c) -= e * u[j * 2 + c];
            }
        }
        REQUIRE(got.codes == want.codes);
        for (size_t g = 0; g < 2; ++g) {
            REQUIRE(got.scale[g] == doctest::Approx(want.scale[g]).epsilon(1e-12));
            REQUIRE(got.zero[g] == doctest::Approx(want.zero[g]).epsilon(1e-12));
        }
    }
}

TEST_CASE("gptq reports non-positive-definite hessians") {
    WeightMatrix w = gaussian_matrix(4, 4, 0x111);
    WeightMatrix x = WeightMatrix::zeros(4, 8);  // H = 0
    GptqConfig cfg{QuantGrid{4, 64}, 2, 0.0};
    CHECK_THROWS_AS(gptq_quantize(w, x, cfg), ConfigError);
}

TEST_CASE("hqq converges immediately on grid-aligned weights") {
    // Integer weights spanning [0, 7] per group: s = 1, z = 0, zero error.
    SplitMix64 rng(0x40);
    QuantGrid grid{3, 8};
    WeightMatrix w = WeightMatrix::zeros(4, 16);
    for (size_t r = 0; r < w.rows; ++r) {
        for (size_t g = 0; g < 2; ++g) {
            w.at(r, g * 8 + 0) = 0;
            w.at(r, g * 8 + 1) = 7;
            for (size_t c = 2; c < 8; ++c) w.at(r, g * 8 + c) = static_cast<double>(rng.below(8));
        }
    }
    HqqConfig cfg;
    cfg.grid = grid;
    HqqResult res = hqq_quantize(w, cfg);
    WeightMatrix back = res.q.dequantize();
    for (size_t i = 0; i < w.data.size(); ++i) CHECK(back.data[i] == w.data[i]);
    for (const auto& [pre, post] : res.objective_trace) {
        CHECK(pre == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(post <= pre + 1e-9);
    }
}

TEST_CASE("hqq objective is non-increasing within every iteration") {
    for (uint64_t seed = 0; seed < 50; ++seed) {
        WeightMatrix w = seed % 2 ? with_outliers(16, 32, seed) : gaussian_matrix(16, 32, seed);
        HqqConfig cfg;
        cfg.grid = QuantGrid{3, 16};
        HqqResult res = hqq_quantize(w, cfg);
        REQUIRE(res.objective_trace.size() == cfg.iters);
        for (const auto& [pre, post] : res.objective_trace) {
            REQUIRE(post <= pre + 1e-9);
        }
    }
}

TEST_CASE("hqq aligns outlier-heavy weights better than rtn under the lp loss") {
    for (uint64_t seed = 0; seed < 10; ++seed) {
        WeightMatrix w = with_outliers(64, 64, 0xf00 + seed);
        QuantGrid grid{3, 64};
        HqqConfig cfg;
        cfg.grid = grid;
        WeightMatrix hqq_back = hqq_quantize(w, cfg).q.dequantize();
        WeightMatrix rtn_back = rtn_quantize(w, grid).dequantize();
        CHECK(lp_loss(w, hqq_back, cfg.p) <= lp_loss(w, rtn_back, cfg.p) + 1e-9);
    }
}

TEST_CASE("parallel kernels are bit-identical to the serial references") {
    WeightMatrix w = with_outliers(33, 70, 0xe9);  // odd shapes on purpose
    QuantGrid grid{4, 16};

    SUBCASE("rtn") { CHECK(same_quantization(rtn_quantize(w, grid), serial::rtn_quantize(w, grid))); }
    SUBCASE("gptq") {
        WeightMatrix x = gaussian_matrix(70, 140, 0x777);
        GptqConfig cfg{grid, 8, 0.01};
        CHECK(same_quantization(gptq_quantize(w, x, cfg), serial::gptq_quantize(w, x, cfg)));
    }
    SUBCASE("hqq") {
        HqqConfig cfg;
        cfg.grid = grid;
        HqqResult a = hqq_quantize(w, cfg);
        HqqResult b = serial::hqq_quantize(w, cfg);
        CHECK(same_quantization(a.q, b.q));
        REQUIRE(a.objective_trace.size() == b.objective_trace.size());
        for (size_t i = 0; i < a.objective_trace.size(); ++i) {
            CHECK(a.objective_trace[i].first == b.objective_trace[i].first);
            CHECK(a.objective_trace[i].second == b.objective_trace[i].second);
        }
    }
    SUBCASE("histogram") {
        Bytes blob = pcdc::test::random_bytes(0x4242, 1 << 20);
        CHECK(count_bytes(blob) == serial::count_bytes(blob));
    }
}

TEST_CASE("matrix fixture files roundtrip") {
    WeightMatrix w = gaussian_matrix(5, 9, 0x3333);
    std::string path = "/tmp/pcdc_test_matrix.bin";
    write_matrix_file(path, w);
    WeightMatrix back = read_matrix_file(path);
    CHECK(back.rows == w.rows);
    CHECK(back.cols == w.cols);
    CHECK(back.data == w.data);
    CHECK_THROWS_AS(read_matrix_file("/tmp/definitely_missing_pcdc.bin"), ConfigError);
}

TEST_CASE("quantized predictor evaluation: identity at 16 bits, monotone below") {
    Bytes corpus = synth_english_text(0x51ce, 64 << 10);
    PredictorQuantEvalConfig cfg;
    cfg.quantizer = "hqq";
    cfg.model.order = 1;
    cfg.model.capacity_log2 = 14;
    cfg.bits_list = {16, 8, 4, 3, 2};
    auto reports = quantized_predictor_eval(corpus, cfg);
    REQUIRE(reports.size() == 5);

    // Reference: the unquantized frozen model.
    ContextModelConfig mc = cfg.model;
    OrderKModel base(mc, 256);
    std::vector<uint32_t> tokens(corpus.begin(), corpus.end());
    base.train(tokens);
    base.set_frozen(true);
    auto twin = base.spawn_decoder_twin();
    uint64_t baseline = compress_bytes_with_predictor(corpus, *twin);
    CHECK(reports[0].compressed_bytes == baseline);  // b=16 is the identity

    for (size_t i = 1; i < reports.size(); ++i) {
        CHECK(reports[i].gamma_r >= reports[i - 1].gamma_r - 1e-12);
        CHECK(reports[i].model_bytes < reports[i - 1].model_bytes);
    }
}
