#pragma once

#include "pcdc/common.hpp"

namespace pcdc {

// Fixed-point cumulative frequency table over an alphabet. cum has
// |alphabet|+1 entries with cum[0] == 0, cum[last] == kTotal and strictly
// increasing steps, so every symbol carries frequency >= 1 and any symbol
// index stays decodable.
class Distribution {
public:
    static constexpr uint32_t kTotalBits = 16;
    static constexpr uint32_t kTotal = 1u << kTotalBits;

    explicit Distribution(std::vector<uint32_t> cum);

    static Distribution uniform(uint32_t alphabet_size);

    // Proportional fixed-point frequencies from integer counts
    // (largest-remainder rounding, floor 1, ties to the lower index).
    // Zero total counts falls back to uniform.
    static Distribution from_counts(std::span<const uint64_t> counts);

    uint32_t alphabet_size() const { return static_cast<uint32_t>(cum_.size() - 1); }
    uint32_t cum(uint32_t i) const { return cum_[i]; }
    uint32_t freq(uint32_t symbol) const { return cum_[symbol + 1] - cum_[symbol]; }

    // Shannon entropy in bits per symbol of the fixed-point probabilities.
    double entropy_bits() const;

    bool operator==(const Distribution& other) const { return cum_ == other.cum_; }

private:
    Distribution() = default;
    std::vector<uint32_t> cum_;
};

// Streaming range coder: 64-bit low accumulator with carry propagation
// through a byte cache, 32-bit range, byte-wise renormalization whenever
// range drops below 2^24. Interval splits use exact 64-bit products, so
// the per-symbol loss against -log2(freq/kTotal) is bounded by
// -log2(1 - kTotal / (2^24 * freq)).
class RangeEncoder {
public:
    // Upper bound on framing bytes: one leading zero byte plus the 5-byte
    // tail flush.
    static constexpr size_t kMaxFlushBytes = 6;

    void encode(const Distribution& dist, uint32_t symbol);

    // Flushes the pending interval; the encoder cannot be reused after.
    Bytes finish();

    size_t bytes_written() const { return out_.size(); }

private:
    void shift_low();

    uint64_t low_ = 0;
    uint32_t range_ = 0xFFFFFFFFu;
    uint8_t cache_ = 0;
    uint64_t cache_count_ = 1;  // pending bytes, includes the leading zero
    bool finished_ = false;
    Bytes out_;
};

class RangeDecoder {
public:
    explicit RangeDecoder(ByteSpan data);

    // Returns the symbol whose subinterval contains the current code value.
    // The distribution sequence must match the encoder's exactly.
    uint32_t decode(const Distribution& dist);

    size_t bytes_consumed() const { return pos_; }

private:
    uint8_t next_byte();

    ByteSpan data_;
    size_t pos_ = 0;
    uint32_t range_ = 0xFFFFFFFFu;
    uint32_t code_ = 0;
};

}  // namespace pcdc
