#pragma once

#include <algorithm>

#include "pcdc/common.hpp"

namespace pcdc {

// MSB-first bit writer. Prefix codes are appended high bit first so the
// byte stream reads naturally in a hex dump.
class BitWriter {
public:
    void put_bit(uint32_t bit) {
        acc_ = (acc_ << 1) | (bit & 1u);
        if (++fill_ == 8) {
            out_.push_back(static_cast<uint8_t>(acc_));
            acc_ = 0;
            fill_ = 0;
        }
    }

    void put_bits(uint64_t value, uint32_t nbits) {
        for (uint32_t i = nbits; i-- > 0;) put_bit(static_cast<uint32_t>(value >> i));
    }

    uint64_t bit_count() const { return out_.size() * 8 + fill_; }

    // Pads the final partial byte with zeros.
    Bytes finish() {
        if (fill_ > 0) {
            out_.push_back(static_cast<uint8_t>(acc_ << (8 - fill_)));
            acc_ = 0;
            fill_ = 0;
        }
        return std::move(out_);
    }

private:
    Bytes out_;
    uint32_t acc_ = 0;
    uint32_t fill_ = 0;
};

class BitReader {
public:
    explicit BitReader(ByteSpan data, uint64_t bit_limit = UINT64_MAX)
        : data_(data), limit_(std::min<uint64_t>(bit_limit, data.size() * 8)) {}

    uint32_t get_bit() {
        if (pos_ >= limit_) throw CorruptStreamError("bit stream exhausted");
        uint32_t bit = (data_[pos_ >> 3] >> (7 - (pos_ & 7))) & 1u;
        ++pos_;
        return bit;
    }

    uint64_t get_bits(uint32_t nbits) {
        uint64_t v = 0;
        for (uint32_t i = 0; i < nbits; ++i) v = (v << 1) | get_bit();
        return v;
    }

    uint64_t bits_consumed() const { return pos_; }
    uint64_t bits_remaining() const { return limit_ - pos_; }

private:
    ByteSpan data_;
    uint64_t limit_;
    uint64_t pos_ = 0;
};

}  // namespace pcdc
