#include "pcdc/quant_eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace pcdc {

uint64_t compress_bytes_with_predictor(ByteSpan corpus, Predictor& predictor) {
    RangeEncoder enc;
    for (uint8_t b : corpus) {
        enc.encode(predictor.next_distribution(), b);
        predictor.update(b);
    }
    return enc.finish().size();
}

namespace {

WeightMatrix counts_to_matrix(const std::vector<OrderKModel::CountRow>& rows, uint32_t group_size) {
    size_t n = std::max<size_t>(rows.size(), 1);
    size_t mat_rows = (n + group_size - 1) / group_size;
    WeightMatrix m = WeightMatrix::zeros(mat_rows, group_size);
    for (size_t i = 0; i < rows.size(); ++i) {
        m.data[i] = static_cast<double>(rows[i].count);
    }
    return m;
}

std::vector<OrderKModel::CountRow> matrix_to_counts(const std::vector<OrderKModel::CountRow>& rows,
                                                    const WeightMatrix& m) {
    std::vector<OrderKModel::CountRow> out = rows;
    for (size_t i = 0; i < out.size(); ++i) {
        double v = std::max(0.0, m.data[i]);
        out[i].count = static_cast<uint32_t>(
            std::min<long long>(std::llround(v), std::numeric_limits<uint32_t>::max()));
    }
    return out;
}

}  // namespace

std::vector<CompressionReport> quantized_predictor_eval(ByteSpan corpus,
                                                        const PredictorQuantEvalConfig& cfg) {
    if (corpus.empty()) throw ConfigError("quant eval: empty corpus");

    OrderKModel base(cfg.model, 256);
    std::vector<uint32_t> tokens(corpus.begin(), corpus.end());
    base.train(tokens);
    base.set_frozen(true);

    std::vector<OrderKModel::CountRow> rows = base.export_counts();
    WeightMatrix table = counts_to_matrix(rows, cfg.group_size);

    std::vector<CompressionReport> reports;
    for (uint32_t bits : cfg.bits_list) {
        std::string method =
            "quant:" + cfg.quantizer + ":b" + std::to_string(bits) + ":k" + std::to_string(cfg.model.order);

        std::unique_ptr<OrderKModel> model = base.spawn_decoder_twin();
        uint64_t model_bytes = 0;
        if (bits == 16) {
            // Identity pass: parameters kept verbatim, 2 bytes each.
            model_bytes = 2 * static_cast<uint64_t>(rows.size()) + 16;
        } else {
            QuantGrid grid{bits, cfg.group_size};
            QuantizedMatrix q;
            if (cfg.quantizer == "rtn") {
                q = rtn_quantize(table, grid);
            } else if (cfg.quantizer == "gptq") {
                SplitMix64 rng(cfg.calibration_seed);
                WeightMatrix x = WeightMatrix::zeros(table.cols, 4 * table.cols);
                for (double& v : x.data) v = rng.gaussian();
                GptqConfig gcfg{grid, cfg.gptq_block_size, 0.01};
                q = gptq_quantize(table, x, gcfg);
            } else if (cfg.quantizer == "hqq") {
                HqqConfig hcfg;
                hcfg.grid = grid;
                q = hqq_quantize(table, hcfg).q;
            } else {
                throw ConfigError("quant eval: unknown quantizer " + cfg.quantizer);
            }
            model->import_counts(matrix_to_counts(rows, q.dequantize()));
            model_bytes = q.storage_bytes();
        }

        uint64_t compressed = compress_bytes_with_predictor(corpus, *model);
        reports.push_back(CompressionReport::make(cfg.corpus_id, method, corpus.size(), compressed,
                                                  model_bytes));
    }
    return reports;
}

}  // namespace pcdc
