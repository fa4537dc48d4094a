#pragma once

#include "pcdc/bitio.hpp"
#include "pcdc/predictor.hpp"

namespace pcdc {

// Token ids sorted by descending fixed-point probability, ties broken by
// ascending token id. Rank 0 is the predictor's favourite.
std::vector<uint32_t> ranked_by_probability(const Distribution& dist);

// Token Rank Compression: record the rank of each true token in the
// predictor's sorted distribution, then squeeze the rank bytes with the
// range coder under a small adaptive order-1 model. Ranks >= 255 are
// escaped as 0xFF + varint(rank - 255).
Bytes trc_encode(Predictor& predictor, std::span<const uint32_t> tokens);
std::vector<uint32_t> trc_decode(Predictor& predictor, ByteSpan payload, size_t token_count);

// Per-step Shannon codebook for Token-by-Token Compression: codeword
// lengths ceil(log2(1/q)) over the quantized distribution, assigned by
// cumulative packing in rank order. Satisfies Kraft by construction.
struct TtcCodebook {
    std::vector<uint32_t> ranked_tokens;
    std::vector<uint8_t> lengths;     // per rank position
    std::vector<uint32_t> codewords;  // per rank position

    // Sum of 2^(16 - l) over the codebook; <= 65536 iff Kraft holds.
    uint64_t kraft_scaled() const;
};

TtcCodebook build_ttc_codebook(const Distribution& dist);

struct BitString {
    Bytes bytes;
    uint64_t bit_count = 0;
};

BitString ttc_encode(Predictor& predictor, std::span<const uint32_t> tokens);
std::vector<uint32_t> ttc_decode(Predictor& predictor, const BitString& bits, size_t token_count);

}  // namespace pcdc
