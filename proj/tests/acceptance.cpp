// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails. Runs against the bundled fixtures under data/.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "pcdc/byte_tokenizers.hpp"
#include "pcdc/coder.hpp"
#include "pcdc/metrics.hpp"
#include "pcdc/ngram.hpp"
#include "pcdc/pipeline.hpp"
#include "pcdc/predictor.hpp"
#include "pcdc/quant.hpp"
#include "pcdc/quant_eval.hpp"
#include "pcdc/synth.hpp"
#include "pcdc/token_codecs.hpp"

#ifndef PCDC_DATA_DIR
#define PCDC_DATA_DIR "data"
#endif

using namespace pcdc;

namespace {

std::string g_detail;

std::string data_path(const std::string& name) { return std::string(PCDC_DATA_DIR) + "/" + name; }

void detail(const char* fmt, ...) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof(buf), fmt, args);
    va_end(args);
    if (!g_detail.empty()) g_detail += "; ";
    g_detail += buf;
}

bool expect(bool cond, const char* what) {
    if (!cond) detail("FAILED: %s", what);
    return cond;
}

Bytes random_bytes(uint64_t seed, size_t n) {
    SplitMix64 rng(seed);
    Bytes out(n);
    for (auto& b : out) b = static_cast<uint8_t>(rng.next());
    return out;
}

Bytes skewed_bytes(uint64_t seed, size_t n) {
    SplitMix64 rng(seed);
    Bytes out(n);
    for (auto& b : out) {
        uint64_t r = rng.below(100);
        b = static_cast<uint8_t>(r < 60 ? rng.below(8) : r < 90 ? rng.below(32) : rng.below(256));
    }
    return out;
}

WeightMatrix gaussian_matrix(size_t rows, size_t cols, uint64_t seed) {
    SplitMix64 rng(seed);
    WeightMatrix m = WeightMatrix::zeros(rows, cols);
    for (double& v : m.data) v = rng.gaussian();
    return m;
}

// ---------------------------------------------------------------------------
// C1: metric exactness against the published summary numbers.
bool c1_metrics() {
    bool ok = expect(std::fabs(raw_rate(336000000ull, 1000000000ull) - 0.336) <= 1e-12,
                     "raw_rate(336e6, 1e9) != 0.336");
    // (gamma_r, gamma_a) pairs; model bytes inverted from the difference.
    const double rows[5][2] = {
        {0.085, 1.321}, {0.093, 0.556}, {0.138, 0.262}, {0.403, 0.493}, {0.129, 0.180}};
    for (const auto& row : rows) {
        uint64_t original = 1000000000ull;
        auto compressed = static_cast<uint64_t>(std::llround(row[0] * 1e9));
        auto model = static_cast<uint64_t>(std::llround((row[1] - row[0]) * 1e9));
        double ga = adjusted_rate(compressed, model, original);
        ok &= expect(std::fabs(ga - row[1]) <= 1e-3, "adjusted_rate off a summary row");
    }
    detail("5 rows reproduced to 1e-3");
    return ok;
}

// ---------------------------------------------------------------------------
// C2: payload within information content + 32 bits + flush on i.i.d. data.
bool c2_coder_optimality() {
    std::vector<std::vector<uint64_t>> sources = {
        {1, 1},                          // uniform binary
        std::vector<uint64_t>(256, 1),   // uniform bytes
        {2, 1, 1},                       // dyadic 0.5/0.25/0.25
        {9, 1},                          // 0.9 / 0.1
        {},                              // zipf-16, filled below
    };
    for (uint64_t r = 1; r <= 16; ++r) sources[4].push_back(1000000 / r);

    bool ok = true;
    double worst_slack = 1e9;
    for (size_t si = 0; si < sources.size(); ++si) {
        Distribution d = Distribution::from_counts(sources[si]);
        for (size_t len : {size_t{10000}, size_t{100000}, size_t{1000000}}) {
            SplitMix64 rng(0xc2c2 + si * 37 + len);
            RangeEncoder enc;
            double info_bits = 0.0;
            for (size_t i = 0; i < len; ++i) {
                // Inverse-CDF draw from the coder's own fixed-point table.
                uint32_t u = static_cast<uint32_t>(rng.below(Distribution::kTotal));
                uint32_t lo = 0, hi = d.alphabet_size();
                while (hi - lo > 1) {
                    uint32_t mid = (lo + hi) / 2;
                    if (d.cum(mid) <= u) lo = mid;
                    else hi = mid;
                }
                info_bits += -std::log2(static_cast<double>(d.freq(lo)) / Distribution::kTotal);
                enc.encode(d, lo);
            }
            double payload_bits = 8.0 * static_cast<double>(enc.finish().size());
            double bound = info_bits + 32.0 + 8.0 * RangeEncoder::kMaxFlushBytes;
            worst_slack = std::min(worst_slack, bound - payload_bits);
            ok &= expect(payload_bits <= bound, "payload exceeded the optimality bound");
        }
    }
    detail("5 distributions x 3 lengths, worst remaining slack %.1f bits", worst_slack);
    return ok;
}

// ---------------------------------------------------------------------------
// C3: 1000 randomized roundtrips per method family.
bool c3_roundtrips() {
    const int kCases = 1000;
    bool ok = true;

    auto model_for = [](uint64_t seed, uint32_t alphabet) {
        ContextModelConfig cfg;
        cfg.order = seed % 4;
        cfg.capacity_log2 = 12;
        return std::make_unique<OrderKModel>(cfg, alphabet);
    };

    // arithmetic / adaptive
    for (int i = 0; ok && i < kCases; ++i) {
        Bytes msg = skewed_bytes(0xa001 + i, i % 600);
        auto enc_m = model_for(i, 256);
        RangeEncoder enc;
        for (uint8_t b : msg) {
            enc.encode(enc_m->next_distribution(), b);
            enc_m->update(b);
        }
        Bytes coded = enc.finish();
        auto dec_m = model_for(i, 256);
        RangeDecoder dec(coded);
        for (uint8_t b : msg) {
            if (dec.decode(dec_m->next_distribution()) != b) {
                ok = expect(false, "arithmetic/adaptive roundtrip");
                break;
            }
            dec_m->update(b);
        }
    }

    // n-gram chain: fresh model per case, held-out text with unseen words
    for (int i = 0; ok && i < kCases; ++i) {
        Bytes corpus = synth_english_text(0xb000 + i, 2048);
        NGramModel model = NGramModel::build(corpus);
        Bytes text = synth_english_text(0xc000 + i, 256 + i % 512);
        NGramModel::Encoded enc = model.compress(text);
        if (model.decompress(enc.bytes, enc.bit_count, text.size()) != text)
            ok = expect(false, "ngram roundtrip");
    }

    // TRC
    for (int i = 0; ok && i < kCases; ++i) {
        Bytes raw = skewed_bytes(0xd000 + i, i % 500);
        std::vector<uint32_t> tokens(raw.begin(), raw.end());
        auto enc_p = model_for(i, 256);
        Bytes coded = trc_encode(*enc_p, tokens);
        auto dec_p = model_for(i, 256);
        if (trc_decode(*dec_p, coded, tokens.size()) != tokens)
            ok = expect(false, "trc roundtrip");
    }

    // TTC
    for (int i = 0; ok && i < kCases; ++i) {
        Bytes raw = skewed_bytes(0xe000 + i, i % 500);
        std::vector<uint32_t> tokens(raw.begin(), raw.end());
        auto enc_p = model_for(i, 256);
        BitString bits = ttc_encode(*enc_p, tokens);
        auto dec_p = model_for(i, 256);
        if (ttc_decode(*dec_p, bits, tokens.size()) != tokens)
            ok = expect(false, "ttc roundtrip");
    }

    // byte strategies over the ac pipeline
    ByteMapping mapping = ByteMapping::build(
        Vocabulary::from_json_file(data_path("vocab_fixture.json")));
    for (int i = 0; ok && i < kCases; ++i) {
        Bytes msg = random_bytes(0xf000 + i, i % 400);

        auto check_tokens = [&](const std::vector<uint32_t>& tokens, uint32_t alphabet,
                                const char* family, auto&& inverse) {
            auto enc_p = model_for(i, alphabet);
            RangeEncoder enc;
            for (uint32_t t : tokens) {
                enc.encode(enc_p->next_distribution(), t);
                enc_p->update(t);
            }
            Bytes coded = enc.finish();
            auto dec_p = model_for(i, alphabet);
            RangeDecoder dec(coded);
            std::vector<uint32_t> out;
            out.reserve(tokens.size());
            for (size_t k = 0; k < tokens.size(); ++k) {
                uint32_t t = dec.decode(dec_p->next_distribution());
                dec_p->update(t);
                out.push_back(t);
            }
            if (inverse(out) != msg) ok = expect(false, family);
        };

        check_tokens(tokenize_as_text(msg), 256, "as_text roundtrip",
                     [](const std::vector<uint32_t>& t) { return detokenize_as_text(t); });
        if (!ok) break;
        check_tokens(tokenize_as_int(msg), 256, "as_int roundtrip",
                     [](const std::vector<uint32_t>& t) { return detokenize_as_int(t); });
        if (!ok) break;
        check_tokens(tokenize_as_byte_tokens(msg, mapping), mapping.alphabet_size(),
                     "as_byte_tokens roundtrip",
                     [&](const std::vector<uint32_t>& t) {
                         return detokenize_as_byte_tokens(t, mapping);
                     });
    }

    detail("%d cases per family across 7 families", kCases);
    return ok;
}

// ---------------------------------------------------------------------------
// C4: gamma_r strictly decreasing in model order on the text fixture.
bool c4_context_trend() {
    Bytes text = read_file(data_path("text_en.txt"));
    bool ok = expect(text.size() >= (1u << 20), "text fixture smaller than 1 MiB");

    auto rate_at = [&](uint32_t order) {
        MethodConfig cfg;
        cfg.method = "ac";
        cfg.order = order;
        cfg.capacity_log2 = 20;
        Bytes container = compress_with_method(text, cfg);
        return raw_rate(container.size(), text.size());
    };
    double r0 = rate_at(0);
    double r1 = rate_at(1);
    double r3 = rate_at(3);
    detail("gamma_r: k0=%.4f k1=%.4f k3=%.4f", r0, r1, r3);
    ok &= expect(r1 < r0, "gamma_r(k1) not below gamma_r(k0)");
    ok &= expect(r3 < r1, "gamma_r(k3) not below gamma_r(k1)");
    ok &= expect(r3 <= 0.9 * r0, "gamma_r(k3) above 0.9 * gamma_r(k0)");
    return ok;
}

// ---------------------------------------------------------------------------
// C5: quantization bit-width trends plus the gptq-vs-rtn objective.
bool c5_quant_trends() {
    bool ok = true;
    Bytes corpus = synth_english_text(0x05c5, 128 << 10);
    for (const char* quantizer : {"gptq", "hqq"}) {
        PredictorQuantEvalConfig cfg;
        cfg.quantizer = quantizer;
        cfg.bits_list = {16, 8, 4, 3, 2};
        cfg.model.order = 1;
        cfg.model.capacity_log2 = 15;
        cfg.corpus_id = "synth-text";
        auto reports = quantized_predictor_eval(corpus, cfg);
        for (size_t i = 1; i < reports.size(); ++i) {
            ok &= expect(reports[i].gamma_r >= reports[i - 1].gamma_r - 1e-12,
                         "gamma_r decreased with coarser bits");
        }
        detail("%s b16/8/4/3/2 = %.4f/%.4f/%.4f/%.4f/%.4f", quantizer, reports[0].gamma_r,
               reports[1].gamma_r, reports[2].gamma_r, reports[3].gamma_r, reports[4].gamma_r);
    }

    // Eq.-7 objective: gptq <= rtn in >= 95% of 200 seeded trials.
    int wins = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        WeightMatrix w = gaussian_matrix(32, 32, 0xc5a0 + t);
        WeightMatrix x = gaussian_matrix(32, 256, 0xc5b0 + t);
        QuantGrid grid{3, 64};
        QuantizedMatrix gq = gptq_quantize(w, x, GptqConfig{grid, 8, 0.01});
        QuantizedMatrix rq = rtn_quantize(w, grid);
        if (activation_error(w, gq.dequantize(), x) <= activation_error(w, rq.dequantize(), x))
            ++wins;
    }
    ok &= expect(wins >= trials * 95 / 100, "gptq lost to rtn too often");
    detail("gptq <= rtn in %d/%d trials", wins, trials);

    // Exact equality when the hessian is proportional to the identity.
    WeightMatrix w = gaussian_matrix(32, 32, 0xc5ff);
    WeightMatrix x = WeightMatrix::zeros(32, 256);
    for (size_t i = 0; i < 32; ++i) x.at(i, i) = 2.5;
    QuantGrid grid{3, 64};
    QuantizedMatrix gq = gptq_quantize(w, x, GptqConfig{grid, 8, 0.01});
    QuantizedMatrix rq = rtn_quantize(w, grid);
    ok &= expect(gq.codes == rq.codes && gq.scale == rq.scale && gq.zero == rq.zero,
                 "gptq != rtn for H proportional to I");
    return ok;
}

// ---------------------------------------------------------------------------
// C6: half-quadratic objective descent per iteration.
bool c6_hqq_descent() {
    bool ok = true;
    double worst = 0.0;
    for (uint64_t seed = 0; seed < 50; ++seed) {
        WeightMatrix w = gaussian_matrix(64, 64, 0xc600 + seed);
        if (seed % 2) {  // 1% outlier cases
            SplitMix64 rng(0xc6aa + seed);
            for (size_t i = 0; i < w.data.size() / 100; ++i) {
                w.data[rng.below(w.data.size())] = (rng.below(2) ? 15.0 : -15.0) * (1.0 + rng.unit());
            }
        }
        HqqConfig cfg;
        cfg.grid = QuantGrid{3, 64};
        cfg.iters = 20;
        HqqResult res = hqq_quantize(w, cfg);
        ok &= expect(res.objective_trace.size() == 20, "wrong iteration count");
        for (const auto& [pre, post] : res.objective_trace) {
            worst = std::max(worst, post - pre);
            ok &= expect(post <= pre + 1e-9, "objective increased within an iteration");
        }
    }
    detail("50 matrices x 20 iterations, worst step delta %.3e", worst);
    return ok;
}

// ---------------------------------------------------------------------------
// C7: TTC codeword-length contract, Kraft, and ordering vs arithmetic.
bool c7_ttc_contract() {
    bool ok = true;

    // Lengths and Kraft on live streams.
    for (int t = 0; ok && t < 20; ++t) {
        Bytes raw = skewed_bytes(0xc700 + t, 256);
        ContextModelConfig mc;
        mc.order = 1;
        mc.capacity_log2 = 12;
        OrderKModel model(mc, 256);
        for (uint8_t b : raw) {
            Distribution d = model.next_distribution();
            TtcCodebook book = build_ttc_codebook(d);
            uint64_t kraft = book.kraft_scaled();
            ok &= expect(kraft <= 65536, "Kraft sum exceeded one");
            for (size_t i = 0; i < book.ranked_tokens.size(); ++i) {
                uint64_t f = d.freq(book.ranked_tokens[i]);
                uint32_t l = book.lengths[i];
                // Defining property of ceil(log2(T/f)).
                bool len_ok = (f << l) >= Distribution::kTotal &&
                              (l == 0 || (f << (l - 1)) < Distribution::kTotal);
                if (!len_ok) {
                    ok = expect(false, "codeword length != ceil(log2(1/q))");
                    break;
                }
            }
            model.update(b);
        }
    }

    // Arithmetic coding at least as tight in >= 95% of trials.
    int ac_wins = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        Bytes raw = skewed_bytes(0xc780 + t, 768);
        std::vector<uint32_t> tokens(raw.begin(), raw.end());
        ContextModelConfig mc;
        mc.order = 1;
        mc.capacity_log2 = 12;
        OrderKModel m1(mc, 256);
        BitString ttc_bits = ttc_encode(m1, tokens);
        OrderKModel m2(mc, 256);
        RangeEncoder enc;
        for (uint32_t tok : tokens) {
            enc.encode(m2.next_distribution(), tok);
            m2.update(tok);
        }
        if (ttc_bits.bit_count >= 8 * enc.finish().size()) ++ac_wins;
    }
    ok &= expect(ac_wins >= 95, "ttc beat arithmetic too often");
    detail("arithmetic <= ttc in %d/%d trials", ac_wins, trials);
    return ok;
}

// ---------------------------------------------------------------------------
// C8: byte-strategy ordering on the PDF fixture.
bool c8_byte_strategies() {
    Bytes pdf = read_file(data_path("sample.pdf"));
    auto rate_for = [&](const std::string& strategy) {
        MethodConfig cfg;
        cfg.method = "ac";
        cfg.order = 3;
        cfg.capacity_log2 = 18;
        cfg.strategy = strategy;
        if (strategy == "bytetok") cfg.vocab_path = data_path("vocab_fixture.json");
        Bytes container = compress_with_method(pdf, cfg);
        return raw_rate(container.size(), pdf.size());
    };
    double r_int = rate_for("int");
    double r_tok = rate_for("bytetok");
    double r_text = rate_for("text");

    MethodConfig huff0;
    huff0.method = "huff0";
    double r_base = raw_rate(compress_with_method(pdf, huff0).size(), pdf.size());

    detail("int=%.4f bytetok=%.4f text=%.4f baseline=%.4f", r_int, r_tok, r_text, r_base);
    bool ok = expect(r_int <= r_tok, "as_int worse than as_byte_tokens");
    ok &= expect(r_tok <= r_text, "as_byte_tokens worse than as_text");
    ok &= expect(std::fabs(r_text - r_base) <= 0.15 * r_base,
                 "as_text not within 15% of the baseline");
    return ok;
}

// ---------------------------------------------------------------------------
// C9: more n-gram training data never hurts the held-out rate.
bool c9_ngram_data_benefit() {
    Bytes train = synth_english_text(0xc901, 10u << 20);
    Bytes held_out = synth_english_text(0xc902, 1u << 20);
    bool ok = true;
    double prev = 2.0;
    std::string seq;
    for (size_t mib : {1, 5, 10}) {
        NGramModel model = NGramModel::build(ByteSpan(train.data(), mib << 20));
        NGramModel::Encoded enc = model.compress(held_out);
        double rate = raw_rate(enc.bytes.size(), held_out.size());
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%zuMiB=%.4f ", mib, rate);
        seq += buf;
        ok &= expect(rate <= prev + 1e-12, "held-out rate rose with more training data");
        prev = rate;
    }
    detail("%s", seq.c_str());
    return ok;
}

// ---------------------------------------------------------------------------
// C10: gptq equals the exhaustive error-feedback search on 2x2 blocks.
bool c10_gptq_bruteforce() {
    bool ok = true;
    for (int t = 0; ok && t < 100; ++t) {
        WeightMatrix w = gaussian_matrix(2, 2, 0xca10 + t);
        WeightMatrix x = gaussian_matrix(2, 16, 0xca90 + t);
        QuantGrid grid{2, 64};
        GptqConfig cfg{grid, 1, 0.01};
        QuantizedMatrix got = gptq_quantize(w, x, cfg);

        // Independent 2x2 reconstruction of the feedback matrix.
        double h[4] = {0, 0, 0, 0};
        for (size_t i = 0; i < 2; ++i)
            for (size_t j = 0; j < 2; ++j) {
                double s = 0.0;
                for (size_t k = 0; k < x.cols; ++k) s += x.at(i, k) * x.at(j, k);
                h[i * 2 + j] = 2.0 * s;
            }
        double lambda = cfg.damping * (h[0] + h[3]) / 2.0;
        h[0] += lambda;
        h[3] += lambda;
        double det = h[0] * h[3] - h[1] * h[2];
        double inv[4] = {h[3] / det, -h[1] / det, -h[2] / det, h[0] / det};
        double l00 = std::sqrt(inv[0]);
        double l10 = inv[2] / l00;
        double l11 = std::sqrt(inv[3] - l10 * l10);
        double u[4] = {l00, l10, 0.0, l11};

        WeightMatrix cur = w;
        uint8_t want_codes[4];
        double scale[2], zero[2];
        for (size_t r = 0; r < 2; ++r) {
            double lo = std::min(w.at(r, 0), w.at(r, 1));
            double hi = std::max(w.at(r, 0), w.at(r, 1));
            scale[r] = (hi == lo) ? 1.0 : (hi - lo) / 3.0;
            zero[r] = (hi == lo) ? -lo : -lo / scale[r];
        }
        for (size_t j = 0; j < 2; ++j) {
            for (size_t r = 0; r < 2; ++r) {
                uint8_t best = 0;
                double best_err = 1e300;
                for (uint32_t code = 0; code <= 3; ++code) {  // exhaustive over codes
                    double err = std::fabs(cur.at(r, j) - scale[r] * (code - zero[r]));
                    if (err < best_err) {
                        best_err = err;
                        best = static_cast<uint8_t>(code);
                    }
                }
                want_codes[r * 2 + j] = best;
                double dq = scale[r] * (best - zero[r]);
                double e = (cur.at(r, j) - dq) / u[j * 2 + j];
                for (size_t c = j; c < 2; ++c) cur.at(r, c) -= e * u[j * 2 + c];
            }
        }
        for (int i = 0; i < 4; ++i) {
            if (got.codes[i] != want_codes[i]) ok = expect(false, "codes diverged from the oracle");
        }
    }
    detail("100 seeded 2x2 cases matched exactly");
    return ok;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<bool()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "metric exactness", c1_metrics},
        {2, "coder optimality", c2_coder_optimality},
        {3, "roundtrip suite", c3_roundtrips},
        {4, "context-length trend", c4_context_trend},
        {5, "quantization trends", c5_quant_trends},
        {6, "hqq descent", c6_hqq_descent},
        {7, "ttc contract", c7_ttc_contract},
        {8, "byte-strategy ordering", c8_byte_strategies},
        {9, "n-gram data benefit", c9_ngram_data_benefit},
        {10, "gptq brute-force oracle", c10_gptq_bruteforce},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        g_detail.clear();
        auto t0 = std::chrono::steady_clock::now();
        bool pass = false;
        try {
            pass = c.run();
        } catch (const std::exception& e) {
            detail("exception: %s", e.what());
        }
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
        std::printf("[%s] C%-2d %-24s (%lld ms) %s\n", pass ? "PASS" : "FAIL", c.id, c.name,
                    static_cast<long long>(ms), g_detail.c_str());
        std::fflush(stdout);
        if (!pass) ++failures;
    }
    if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
