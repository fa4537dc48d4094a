#pragma once

#include "pcdc/metrics.hpp"
#include "pcdc/predictor.hpp"
#include "pcdc/quant.hpp"

namespace pcdc {

// Measures what quantizing a predictor's parameter tables costs in raw
// rate: train an order-k byte model on the corpus, freeze it, quantize its
// count tables at each requested width, re-compress the corpus with the
// distorted model and report gamma_r / gamma_a per width. Width 16 is the
// identity (no quantization, 2 bytes per parameter).
struct PredictorQuantEvalConfig {
    std::string quantizer = "hqq";  // rtn | gptq | hqq
    std::vector<uint32_t> bits_list = {16, 8, 4, 3, 2};
    ContextModelConfig model;
    uint32_t group_size = 64;
    uint32_t gptq_block_size = 8;
    uint64_t calibration_seed = 0x5eedcafe;  // gptq synthetic calibration draws
    std::string corpus_id = "corpus";
};

std::vector<CompressionReport> quantized_predictor_eval(ByteSpan corpus,
                                                        const PredictorQuantEvalConfig& cfg);

// The frozen-model compression pass used by the eval (exposed for tests):
// returns the range-coder payload size for the corpus bytes under the
// given predictor.
uint64_t compress_bytes_with_predictor(ByteSpan corpus, Predictor& predictor);

}  // namespace pcdc
