#pragma once

#include "pcdc/bitio.hpp"
#include "pcdc/common.hpp"

namespace pcdc {

// Canonical Huffman code over a dense symbol alphabet. Symbols with count
// zero get no codeword. Codeword assignment is canonical (sorted by length,
// then symbol), so a code is fully described by its length table.
class CanonicalCode {
public:
    static constexpr uint32_t kMaxCodeLen = 57;

    // Huffman code lengths from counts, deterministic under ties.
    static CanonicalCode from_counts(std::span<const uint64_t> counts);

    // Rebuild from a serialized length table.
    static CanonicalCode from_lengths(std::vector<uint8_t> lengths);

    void encode(BitWriter& out, uint32_t symbol) const;
    uint32_t decode(BitReader& in) const;

    const std::vector<uint8_t>& lengths() const { return lengths_; }
    uint8_t length_of(uint32_t symbol) const { return lengths_[symbol]; }
    bool has_symbol(uint32_t symbol) const {
        return symbol < lengths_.size() && lengths_[symbol] != 0;
    }

    // Mean codeword length in bits under the given counts.
    double expected_length(std::span<const uint64_t> counts) const;

private:
    void build_tables();

    std::vector<uint8_t> lengths_;
    std::vector<uint64_t> code_of_;        // per symbol
    uint8_t min_len_ = 0;
    uint8_t max_len_ = 0;
    // Canonical decode tables indexed by length.
    std::vector<uint64_t> first_code_;
    std::vector<uint32_t> first_index_;
    std::vector<uint32_t> count_at_len_;
    std::vector<uint32_t> sorted_symbols_;
};

}  // namespace pcdc
