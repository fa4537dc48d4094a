#include <cstdio>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pcdc/bench.hpp"
#include "pcdc/byte_tokenizers.hpp"
#include "pcdc/metrics.hpp"
#include "pcdc/ngram.hpp"
#include "pcdc/pipeline.hpp"
#include "pcdc/quant.hpp"
#include "pcdc/quant_eval.hpp"

namespace {

void add_method_flags(CLI::App* cmd, pcdc::MethodConfig& cfg) {
    cmd->add_option("--method", cfg.method, "huff0 | ac | ngram | trc | ttc")
        ->default_val("ac");
    cmd->add_option("--order", cfg.order, "built-in context model order (0..12)")->default_val(3);
    cmd->add_option("--capacity", cfg.capacity_log2, "log2 of the context table capacity")
        ->default_val(20);
    cmd->add_option("--strategy", cfg.strategy, "byte strategy for ac: int | text | bytetok")
        ->default_val("int");
    cmd->add_option("--vocab", cfg.vocab_path, "vocabulary JSON for the bytetok strategy");
    cmd->add_option("--model", cfg.model_path, "n-gram model file (ngram method)");
    cmd->add_option("--endpoint", cfg.ext_endpoint,
                    "external predictor endpoint: pipe:<command> or tcp:<host>:<port>");
    cmd->add_option("--timeout-ms", cfg.ext_timeout_ms, "external predictor timeout")
        ->default_val(5000);
    cmd->add_option("--declared-model-bytes", cfg.ext_model_bytes,
                    "model size declared for external predictors");
}

pcdc::ByteSpan as_span(const std::string& s) {
    return pcdc::ByteSpan(reinterpret_cast<const uint8_t*>(s.data()), s.size());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pcdc: predictor-driven lossless compression toolkit"};
    app.require_subcommand(1);

    // --- compress ---
    auto* c_cmd = app.add_subcommand("compress", "compress a file into a .pcdc container");
    std::string c_in, c_out;
    pcdc::MethodConfig c_cfg;
    c_cmd->add_option("input", c_in)->required();
    c_cmd->add_option("output", c_out)->required();
    add_method_flags(c_cmd, c_cfg);

    // --- decompress ---
    auto* d_cmd = app.add_subcommand("decompress", "restore a .pcdc container");
    std::string d_in, d_out;
    pcdc::MethodConfig d_cfg;
    d_cmd->add_option("input", d_in)->required();
    d_cmd->add_option("output", d_out)->required();
    add_method_flags(d_cmd, d_cfg);

    // --- bench ---
    auto* b_cmd = app.add_subcommand("bench", "run a benchmark plan");
    std::string b_plan;
    b_cmd->add_option("plan", b_plan, "bench plan JSON file")->required();

    // --- train-ngram ---
    auto* t_cmd = app.add_subcommand("train-ngram", "build and serialize an n-gram model");
    std::string t_corpus, t_out;
    t_cmd->add_option("corpus", t_corpus)->required();
    t_cmd->add_option("output", t_out)->required();

    // --- quantize-demo ---
    auto* q_cmd = app.add_subcommand("quantize-demo",
                                     "quantize a matrix fixture or a predictor's tables");
    std::string q_matrix, q_corpus, q_quantizer = "hqq", q_out;
    std::vector<uint32_t> q_bits = {16, 8, 4, 3, 2};
    uint32_t q_group = 64, q_order = 2, q_block = 8;
    q_cmd->add_option("--matrix", q_matrix, "matrix fixture file (PCMX)");
    q_cmd->add_option("--corpus", q_corpus, "corpus file for the predictor evaluation");
    q_cmd->add_option("--quantizer", q_quantizer, "rtn | gptq | hqq")->default_val("hqq");
    q_cmd->add_option("--bits", q_bits, "bit widths to evaluate");
    q_cmd->add_option("--group-size", q_group)->default_val(64);
    q_cmd->add_option("--order", q_order, "model order for corpus mode")->default_val(2);
    q_cmd->add_option("--block-size", q_block, "gptq block size")->default_val(8);
    q_cmd->add_option("--out", q_out, "write the JSON report here (default stdout)");

    // --- byte-map ---
    auto* m_cmd = app.add_subcommand("byte-map", "dump a byte-token mapping as CSV");
    std::string m_vocab, m_out;
    m_cmd->add_option("vocab", m_vocab, "vocabulary JSON file")->required();
    m_cmd->add_option("output", m_out, "CSV output path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_cmd->parsed()) {
            pcdc::Bytes input = pcdc::read_file(c_in);
            pcdc::Bytes container = pcdc::compress_with_method(input, c_cfg);
            pcdc::write_file_atomic(c_out, container);
            double rate = input.empty() ? 0.0 : pcdc::raw_rate(container.size(), input.size());
            std::printf("gamma_r = %.6f (%zu -> %zu bytes, method %s)\n", rate, input.size(),
                        container.size(), c_cfg.label().c_str());
        } else if (d_cmd->parsed()) {
            pcdc::Bytes container = pcdc::read_file(d_in);
            pcdc::Bytes restored = pcdc::decompress_with_method(container, d_cfg);
            pcdc::write_file_atomic(d_out, restored);
            std::printf("restored %zu bytes\n", restored.size());
        } else if (b_cmd->parsed()) {
            pcdc::BenchPlan plan = pcdc::BenchPlan::from_json_file(b_plan);
            pcdc::BenchResult result = pcdc::run_bench(plan);
            std::fputs(result.to_csv().c_str(), stdout);
            for (const auto& line : result.trend_lines) std::printf("%s\n", line.c_str());
            if (!plan.output_prefix.empty())
                std::printf("wrote %s.csv and %s.json\n", plan.output_prefix.c_str(),
                            plan.output_prefix.c_str());
        } else if (t_cmd->parsed()) {
            pcdc::Bytes corpus = pcdc::read_file(t_corpus);
            pcdc::NGramModel model = pcdc::NGramModel::build(corpus);
            pcdc::Bytes serialized = model.serialize();
            pcdc::write_file_atomic(t_out, serialized);
            std::printf("model: %zu bytes, %u words\n", serialized.size(), model.word_vocab_size());
        } else if (q_cmd->parsed()) {
            nlohmann::json report;
            if (!q_matrix.empty()) {
                pcdc::WeightMatrix w = pcdc::read_matrix_file(q_matrix);
                report["matrix"] = q_matrix;
                report["quantizer"] = q_quantizer;
                report["runs"] = nlohmann::json::array();
                for (uint32_t bits : q_bits) {
                    if (bits == 16) continue;  // identity, nothing to measure
                    pcdc::QuantGrid grid{bits, q_group};
                    pcdc::QuantizedMatrix q;
                    if (q_quantizer == "rtn") {
                        q = pcdc::rtn_quantize(w, grid);
                    } else if (q_quantizer == "gptq") {
                        pcdc::SplitMix64 rng(0x5eedcafe);
                        pcdc::WeightMatrix x = pcdc::WeightMatrix::zeros(w.cols, 4 * w.cols);
                        for (double& v : x.data) v = rng.gaussian();
                        q = pcdc::gptq_quantize(w, x, pcdc::GptqConfig{grid, q_block, 0.01});
                    } else {
                        pcdc::HqqConfig hcfg;
                        hcfg.grid = grid;
                        q = pcdc::hqq_quantize(w, hcfg).q;
                    }
                    nlohmann::json run;
                    run["bits"] = bits;
                    run["storage_bytes"] = q.storage_bytes();
                    run["frobenius_error"] = pcdc::frobenius_error(w, q.dequantize());
                    report["runs"].push_back(run);
                }
            } else if (!q_corpus.empty()) {
                pcdc::Bytes corpus = pcdc::read_file(q_corpus);
                pcdc::PredictorQuantEvalConfig cfg;
                cfg.quantizer = q_quantizer;
                cfg.bits_list = q_bits;
                cfg.model.order = q_order;
                cfg.group_size = q_group;
                cfg.gptq_block_size = q_block;
                cfg.corpus_id = q_corpus;
                report["runs"] = nlohmann::json::array();
                for (const auto& r : pcdc::quantized_predictor_eval(corpus, cfg)) {
                    report["runs"].push_back(nlohmann::json::parse(r.to_json()));
                }
            } else {
                std::fprintf(stderr, "quantize-demo needs --matrix or --corpus\n");
                return 2;
            }
            std::string text = report.dump(2);
            if (q_out.empty()) {
                std::printf("%s\n", text.c_str());
            } else {
                pcdc::write_file_atomic(q_out, as_span(text));
                std::printf("wrote %s\n", q_out.c_str());
            }
        } else if (m_cmd->parsed()) {
            pcdc::Vocabulary vocab = pcdc::Vocabulary::from_json_file(m_vocab);
            pcdc::ByteMapping mapping = pcdc::ByteMapping::build(vocab);
            std::string csv = mapping.to_csv();
            pcdc::write_file_atomic(m_out, as_span(csv));
            std::printf("mapping is injective over 256 bytes; alphabet size %u\n",
                        mapping.alphabet_size());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
