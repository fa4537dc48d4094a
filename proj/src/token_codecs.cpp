#include "pcdc/token_codecs.hpp"

#include <algorithm>
#include <numeric>

namespace pcdc {

namespace {

// Fixed configuration of the internal rank-byte model. Part of the TRC
// stream format.
ContextModelConfig rank_model_config() {
    ContextModelConfig cfg;
    cfg.order = 1;
    cfg.capacity_log2 = 12;
    return cfg;
}

constexpr uint32_t kRankEscape = 0xFF;

void append_rank_bytes(Bytes& out, uint32_t rank) {
    if (rank < kRankEscape) {
        out.push_back(static_cast<uint8_t>(rank));
    } else {
        out.push_back(kRankEscape);
        put_varint(out, rank - kRankEscape);
    }
}

}  // namespace

std::vector<uint32_t> ranked_by_probability(const Distribution& dist) {
    std::vector<uint32_t> order(dist.alphabet_size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&dist](uint32_t a, uint32_t b) {
        uint32_t fa = dist.freq(a), fb = dist.freq(b);
        if (fa != fb) return fa > fb;
        return a < b;
    });
    return order;
}

Bytes trc_encode(Predictor& predictor, std::span<const uint32_t> tokens) {
    if (tokens.empty()) return {};

    Bytes rank_bytes;
    rank_bytes.reserve(tokens.size());
    for (uint32_t token : tokens) {
        Distribution dist = predictor.next_distribution();
        std::vector<uint32_t> order = ranked_by_probability(dist);
        auto it = std::find(order.begin(), order.end(), token);
        if (it == order.end()) throw ConfigError("trc: token outside predictor alphabet");
        append_rank_bytes(rank_bytes, static_cast<uint32_t>(it - order.begin()));
        predictor.update(token);
    }

    OrderKModel rank_model(rank_model_config(), 256);
    RangeEncoder enc;
    for (uint8_t b : rank_bytes) {
        enc.encode(rank_model.next_distribution(), b);
        rank_model.update(b);
    }
    return enc.finish();
}

std::vector<uint32_t> trc_decode(Predictor& predictor, ByteSpan payload, size_t token_count) {
    std::vector<uint32_t> tokens;
    if (token_count == 0) return tokens;
    tokens.reserve(token_count);

    OrderKModel rank_model(rank_model_config(), 256);
    RangeDecoder dec(payload);
    auto next_rank_byte = [&]() -> uint8_t {
        uint32_t b = dec.decode(rank_model.next_distribution());
        rank_model.update(b);
        return static_cast<uint8_t>(b);
    };

    for (size_t i = 0; i < token_count; ++i) {
        uint32_t rank = next_rank_byte();
        if (rank == kRankEscape) {
            uint64_t extra = 0;
            int shift = 0;
            while (true) {
                if (shift > 63) throw CorruptStreamError("trc: overlong rank varint");
                uint8_t b = next_rank_byte();
                extra |= static_cast<uint64_t>(b & 0x7F) << shift;
                if (!(b & 0x80)) break;
                shift += 7;
            }
            uint64_t wide = kRankEscape + extra;
            if (wide > 0xFFFFFFFFull) throw CorruptStreamError("trc: rank overflow");
            rank = static_cast<uint32_t>(wide);
        }
        Distribution dist = predictor.next_distribution();
        if (rank >= dist.alphabet_size()) throw CorruptStreamError("trc: rank outside alphabet");
        std::vector<uint32_t> order = ranked_by_probability(dist);
        uint32_t token = order[rank];
        tokens.push_back(token);
        predictor.update(token);
    }
    return tokens;
}

uint64_t TtcCodebook::kraft_scaled() const {
    uint64_t sum = 0;
    for (uint8_t l : lengths) sum += uint64_t{1} << (16 - l);
    return sum;
}

TtcCodebook build_ttc_codebook(const Distribution& dist) {
    TtcCodebook book;
    book.ranked_tokens = ranked_by_probability(dist);
    const size_t n = book.ranked_tokens.size();
    book.lengths.resize(n);
    book.codewords.resize(n);

    // l = ceil(log2(kTotal / freq)): smallest l with freq * 2^l >= kTotal.
    uint64_t acc = 0;  // cumulative codeword space in units of 2^-16
    for (size_t i = 0; i < n; ++i) {
        uint32_t f = dist.freq(book.ranked_tokens[i]);
        uint32_t l = 0;
        while ((static_cast<uint64_t>(f) << l) < Distribution::kTotal) ++l;
        book.lengths[i] = static_cast<uint8_t>(l);
        book.codewords[i] = static_cast<uint32_t>(acc >> (16 - l));
        acc += uint64_t{1} << (16 - l);
    }
    return book;
}

BitString ttc_encode(Predictor& predictor, std::span<const uint32_t> tokens) {
    BitString out;
    if (tokens.empty()) return out;

    BitWriter writer;
    for (uint32_t token : tokens) {
        Distribution dist = predictor.next_distribution();
        TtcCodebook book = build_ttc_codebook(dist);
        auto it = std::find(book.ranked_tokens.begin(), book.ranked_tokens.end(), token);
        if (it == book.ranked_tokens.end()) throw ConfigError("ttc: token outside predictor alphabet");
        size_t pos = static_cast<size_t>(it - book.ranked_tokens.begin());
        writer.put_bits(book.codewords[pos], book.lengths[pos]);
        predictor.update(token);
    }
    out.bit_count = writer.bit_count();
    out.bytes = writer.finish();
    return out;
}

std::vector<uint32_t> ttc_decode(Predictor& predictor, const BitString& bits, size_t token_count) {
    std::vector<uint32_t> tokens;
    if (token_count == 0) return tokens;
    tokens.reserve(token_count);

    BitReader reader(bits.bytes, bits.bit_count);
    for (size_t i = 0; i < token_count; ++i) {
        Distribution dist = predictor.next_distribution();
        TtcCodebook book = build_ttc_codebook(dist);

        // Canonical decode over rank positions: codewords were packed
        // sequentially in rank order with non-decreasing lengths.
        uint32_t first_rank[18] = {0};
        uint32_t count_at[18] = {0};
        uint32_t first_code[18] = {0};
        for (size_t r = 0; r < book.lengths.size(); ++r) {
            uint8_t l = book.lengths[r];
            if (count_at[l] == 0) {
                first_rank[l] = static_cast<uint32_t>(r);
                first_code[l] = book.codewords[r];
            }
            count_at[l] += 1;
        }

        uint8_t min_len = book.lengths.front();
        uint8_t max_len = book.lengths.back();
        uint64_t value = reader.get_bits(min_len);
        uint32_t rank = 0;
        bool matched = false;
        for (uint32_t len = min_len; len <= max_len; ++len) {
            if (count_at[len] > 0 && value >= first_code[len] &&
                value - first_code[len] < count_at[len]) {
                rank = first_rank[len] + static_cast<uint32_t>(value - first_code[len]);
                matched = true;
                break;
            }
            if (len < max_len) value = (value << 1) | reader.get_bit();
        }
        if (!matched) throw CorruptStreamError("ttc: unmatched codeword");

        uint32_t token = book.ranked_tokens[rank];
        tokens.push_back(token);
        predictor.update(token);
    }
    return tokens;
}

}  // namespace pcdc
