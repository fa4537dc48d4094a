#include "pcdc/coder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pcdc {

Distribution::Distribution(std::vector<uint32_t> cum) : cum_(std::move(cum)) {
    if (cum_.size() < 2) throw ConfigError("distribution: empty alphabet");
    if (cum_.front() != 0) throw ConfigError("distribution: cum[0] != 0");
    if (cum_.back() != kTotal) throw ConfigError("distribution: cum[last] != 2^16");
    for (size_t i = 0; i + 1 < cum_.size(); ++i) {
        if (cum_[i + 1] <= cum_[i]) throw ConfigError("distribution: non-monotone cum table");
    }
}

Distribution Distribution::uniform(uint32_t alphabet_size) {
    if (alphabet_size == 0 || alphabet_size > kTotal)
        throw ConfigError("distribution: alphabet size out of range");
    std::vector<uint32_t> cum(alphabet_size + 1);
    for (uint32_t i = 0; i <= alphabet_size; ++i) {
        cum[i] = static_cast<uint32_t>((static_cast<uint64_t>(kTotal) * i) / alphabet_size);
    }
    return Distribution(std::move(cum));
}

Distribution Distribution::from_counts(std::span<const uint64_t> counts) {
    const size_t n = counts.size();
    if (n == 0 || n > kTotal) throw ConfigError("from_counts: alphabet size out of range");
    uint64_t total = std::accumulate(counts.begin(), counts.end(), uint64_t{0});
    if (total == 0) return uniform(static_cast<uint32_t>(n));

    // Exact integer apportionment: base = floor(c*kTotal/total), remainders
    // compared as c*kTotal mod total.
    std::vector<uint64_t> freq(n), rem(n);
    uint64_t assigned = 0;
    for (size_t i = 0; i < n; ++i) {
        // counts are bounded well below 2^48 in practice; the product fits.
        uint64_t scaled = counts[i] * kTotal;
        freq[i] = scaled / total;
        rem[i] = scaled % total;
        if (freq[i] == 0) {
            freq[i] = 1;
            rem[i] = 0;  // floor bump, no rounding claim left
        }
        assigned += freq[i];
    }

    if (assigned < kTotal) {
        std::vector<uint32_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
            if (rem[a] != rem[b]) return rem[a] > rem[b];
            return a < b;
        });
        uint64_t missing = kTotal - assigned;
        for (size_t i = 0; missing > 0; i = (i + 1) % n) {
            freq[order[i]] += 1;
            --missing;
        }
    } else if (assigned > kTotal) {
        // Floor bumps overshot; take back from the largest entries.
        std::vector<uint32_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
            if (freq[a] != freq[b]) return freq[a] > freq[b];
            return a < b;
        });
        uint64_t excess = assigned - kTotal;
        for (size_t i = 0; excess > 0; i = (i + 1) % n) {
            if (freq[order[i]] > 1) {
                freq[order[i]] -= 1;
                --excess;
            }
        }
    }

    std::vector<uint32_t> cum(n + 1, 0);
    for (size_t i = 0; i < n; ++i) cum[i + 1] = cum[i] + static_cast<uint32_t>(freq[i]);
    return Distribution(std::move(cum));
}

double Distribution::entropy_bits() const {
    double h = 0.0;
    for (uint32_t s = 0; s < alphabet_size(); ++s) {
        double p = static_cast<double>(freq(s)) / kTotal;
        h -= p * std::log2(p);
    }
    return h;
}

namespace {
constexpr uint32_t kRenormBound = 1u << 24;

inline uint32_t interval_boundary(uint32_t range, uint32_t cum) {
    return static_cast<uint32_t>((static_cast<uint64_t>(range) * cum) >> Distribution::kTotalBits);
}
}  // namespace

void RangeEncoder::shift_low() {
    // Flush the cached byte once no future carry can touch it, or resolve
    // the carry now if one already happened (low >= 2^32).
    if (low_ < 0xFF000000ULL || low_ > 0xFFFFFFFFULL) {
        uint8_t carry = static_cast<uint8_t>(low_ >> 32);
        do {
            out_.push_back(static_cast<uint8_t>(cache_ + carry));
            cache_ = 0xFF;
        } while (--cache_count_ != 0);
        cache_ = static_cast<uint8_t>(low_ >> 24);
    }
    ++cache_count_;
    low_ = (low_ << 8) & 0xFFFFFFFFULL;
}

void RangeEncoder::encode(const Distribution& dist, uint32_t symbol) {
    if (finished_) throw ConfigError("encode after finish");
    if (symbol >= dist.alphabet_size()) throw ConfigError("encode: symbol out of range");
    uint32_t lo = interval_boundary(range_, dist.cum(symbol));
    uint32_t hi = interval_boundary(range_, dist.cum(symbol + 1));
    low_ += lo;
    range_ = hi - lo;
    while (range_ < kRenormBound) {
        shift_low();
        range_ <<= 8;
    }
}

Bytes RangeEncoder::finish() {
    if (finished_) throw ConfigError("finish called twice");
    finished_ = true;
    for (int i = 0; i < 5; ++i) shift_low();
    return std::move(out_);
}

RangeDecoder::RangeDecoder(ByteSpan data) : data_(data) {
    // The first byte is the encoder's flushed initial cache and is always
    // zero; anything else means the stream was not produced by this coder.
    if (next_byte() != 0) throw CorruptStreamError("range coder: bad leading byte");
    for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
}

uint8_t RangeDecoder::next_byte() {
    if (pos_ >= data_.size()) throw CorruptStreamError("range coder: truncated stream");
    return data_[pos_++];
}

uint32_t RangeDecoder::decode(const Distribution& dist) {
    if (code_ >= range_) throw CorruptStreamError("range coder: code outside interval");
    // Largest symbol s with boundary(cum[s]) <= code; the boundary function
    // is monotone so plain binary search applies.
    uint32_t lo_sym = 0;
    uint32_t hi_sym = dist.alphabet_size();  // exclusive
    while (hi_sym - lo_sym > 1) {
        uint32_t mid = lo_sym + (hi_sym - lo_sym) / 2;
        if (interval_boundary(range_, dist.cum(mid)) <= code_) {
            lo_sym = mid;
        } else {
            hi_sym = mid;
        }
    }
    uint32_t lo = interval_boundary(range_, dist.cum(lo_sym));
    uint32_t hi = interval_boundary(range_, dist.cum(lo_sym + 1));
    code_ -= lo;
    range_ = hi - lo;
    while (range_ < kRenormBound) {
        code_ = (code_ << 8) | next_byte();
        range_ <<= 8;
    }
    return lo_sym;
}

}  // namespace pcdc
