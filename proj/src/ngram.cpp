#include "pcdc/ngram.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <unordered_map>

namespace pcdc {

namespace {

constexpr uint8_t kWsBytes[6] = {' ', '\t', '\n', '\r', '\v', '\f'};
constexpr uint32_t kWsEnd = 6;

int ws_byte_index(uint8_t b) {
    for (int i = 0; i < 6; ++i) {
        if (kWsBytes[i] == b) return i;
    }
    return -1;
}

void put_u32(Bytes& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 24));
}

uint32_t get_u32(ByteSpan data, size_t& pos) {
    if (pos + 4 > data.size()) throw CorruptStreamError("ngram model: truncated");
    uint32_t v = data[pos] | (data[pos + 1] << 8) | (data[pos + 2] << 16) |
                 (static_cast<uint32_t>(data[pos + 3]) << 24);
    pos += 4;
    return v;
}

std::string get_string(ByteSpan data, size_t& pos) {
    uint64_t len = get_varint(data, pos);
    if (pos + len > data.size()) throw CorruptStreamError("ngram model: truncated string");
    std::string s(reinterpret_cast<const char*>(data.data() + pos), len);
    pos += len;
    return s;
}

}  // namespace

bool is_word_whitespace(uint8_t b) { return ws_byte_index(b) >= 0; }

WordStream tokenize_words(ByteSpan text) {
    WordStream stream;
    size_t i = 0;
    while (i < text.size()) {
        size_t word_start = i;
        while (i < text.size() && !is_word_whitespace(text[i])) ++i;
        std::string word(reinterpret_cast<const char*>(text.data() + word_start), i - word_start);
        size_t ws_start = i;
        while (i < text.size() && is_word_whitespace(text[i])) ++i;
        std::string ws(reinterpret_cast<const char*>(text.data() + ws_start), i - ws_start);
        stream.pairs.emplace_back(std::move(word), std::move(ws));
    }
    return stream;
}

Bytes detokenize_words(const WordStream& stream) {
    Bytes out;
    for (const auto& [word, ws] : stream.pairs) {
        out.insert(out.end(), word.begin(), word.end());
        out.insert(out.end(), ws.begin(), ws.end());
    }
    return out;
}

std::optional<uint32_t> NGramModel::ContextCode::position_of(uint32_t symbol) const {
    auto it = std::lower_bound(symbols.begin(), symbols.end(), symbol);
    if (it != symbols.end() && *it == symbol) return static_cast<uint32_t>(it - symbols.begin());
    return std::nullopt;
}

std::optional<uint32_t> NGramModel::word_id(const std::string& w) const {
    auto it = std::lower_bound(words_.begin(), words_.end(), w);
    if (it != words_.end() && *it == w) return static_cast<uint32_t>(it - words_.begin());
    return std::nullopt;
}

std::optional<uint32_t> NGramModel::ws_id(const std::string& ws) const {
    auto it = std::lower_bound(ws_runs_.begin(), ws_runs_.end(), ws);
    if (it != ws_runs_.end() && *it == ws) return static_cast<uint32_t>(it - ws_runs_.begin());
    return std::nullopt;
}

uint32_t NGramModel::context_id_of(const std::string& word) const {
    auto id = word_id(word);
    return id ? *id : unk_word();
}

namespace {
NGramModel::ContextCode make_context_code(const std::map<uint32_t, uint64_t>& counts) {
    NGramModel::ContextCode cc;
    cc.symbols.reserve(counts.size());
    cc.counts.reserve(counts.size());
    for (const auto& [sym, c] : counts) {
        cc.symbols.push_back(sym);
        cc.counts.push_back(c);
    }
    cc.code = CanonicalCode::from_counts(cc.counts);
    return cc;
}
}  // namespace

NGramModel NGramModel::build(ByteSpan corpus) {
    NGramModel m;
    WordStream stream = tokenize_words(corpus);

    std::set<std::string> word_set, ws_set;
    for (const auto& [word, ws] : stream.pairs) {
        word_set.insert(word);
        ws_set.insert(ws);
    }
    m.words_.assign(word_set.begin(), word_set.end());
    m.ws_runs_.assign(ws_set.begin(), ws_set.end());

    std::unordered_map<std::string, uint32_t> word_ids, ws_ids;
    for (uint32_t i = 0; i < m.words_.size(); ++i) word_ids[m.words_[i]] = i;
    for (uint32_t i = 0; i < m.ws_runs_.size(); ++i) ws_ids[m.ws_runs_[i]] = i;

    const uint32_t unk_w = m.unk_word();
    const uint32_t start = m.start_word();
    const uint32_t unk_s = m.unk_ws();

    std::map<std::pair<uint32_t, uint32_t>, std::map<uint32_t, uint64_t>> tri_counts;
    std::map<uint32_t, std::map<uint32_t, uint64_t>> bi_counts;
    std::map<uint32_t, uint64_t> uni_counts, ws_uni_counts;
    m.char_counts_.assign(257, 0);
    m.ws_char_counts_.assign(7, 0);

    uint32_t c2 = start, c1 = start;
    for (const auto& [word, ws] : stream.pairs) {
        uint32_t wid = word_ids[word];
        tri_counts[{c2, c1}][wid] += 1;
        bi_counts[c1][wid] += 1;
        uni_counts[wid] += 1;
        for (uint8_t b : word) m.char_counts_[b] += 1;
        m.char_counts_[kEndOfWord] += 1;

        ws_uni_counts[ws_ids[ws]] += 1;
        for (uint8_t b : ws) m.ws_char_counts_[ws_byte_index(b)] += 1;
        m.ws_char_counts_[kWsEnd] += 1;

        c2 = c1;
        c1 = wid;
    }

    // UNK carries count 1 in every context; the char tables get a Laplace
    // floor so any byte stays codable.
    for (auto& [ctx, counts] : tri_counts) counts[unk_w] = 1;
    for (auto& [ctx, counts] : bi_counts) counts[unk_w] = 1;
    uni_counts[unk_w] = 1;
    ws_uni_counts[unk_s] = 1;
    for (auto& c : m.char_counts_) c += 1;
    for (auto& c : m.ws_char_counts_) c += 1;

    for (const auto& [ctx, counts] : tri_counts) m.trigram_.emplace(ctx, make_context_code(counts));
    for (const auto& [ctx, counts] : bi_counts) m.bigram_.emplace(ctx, make_context_code(counts));
    m.unigram_ = make_context_code(uni_counts);
    m.ws_unigram_ = make_context_code(ws_uni_counts);
    m.char_code_ = CanonicalCode::from_counts(m.char_counts_);
    m.ws_char_code_ = CanonicalCode::from_counts(m.ws_char_counts_);
    return m;
}

void NGramModel::encode_word(BitWriter& out, const std::string& word, uint32_t c2,
                             uint32_t c1) const {
    std::optional<uint32_t> wid = word_id(word);

    // A missing context emits nothing: the decoder sees the same tables and
    // skips the same levels.
    if (auto it = trigram_.find({c2, c1}); it != trigram_.end()) {
        if (wid) {
            if (auto pos = it->second.position_of(*wid)) {
                it->second.code.encode(out, *pos);
                return;
            }
        }
        it->second.code.encode(out, *it->second.position_of(unk_word()));
    }
    if (auto it = bigram_.find(c1); it != bigram_.end()) {
        if (wid) {
            if (auto pos = it->second.position_of(*wid)) {
                it->second.code.encode(out, *pos);
                return;
            }
        }
        it->second.code.encode(out, *it->second.position_of(unk_word()));
    }
    if (wid) {
        unigram_.code.encode(out, *unigram_.position_of(*wid));
        return;
    }
    unigram_.code.encode(out, *unigram_.position_of(unk_word()));
    for (uint8_t b : word) char_code_.encode(out, b);
    char_code_.encode(out, kEndOfWord);
}

void NGramModel::encode_ws(BitWriter& out, const std::string& ws) const {
    if (auto sid = ws_id(ws)) {
        ws_unigram_.code.encode(out, *ws_unigram_.position_of(*sid));
        return;
    }
    ws_unigram_.code.encode(out, *ws_unigram_.position_of(unk_ws()));
    for (uint8_t b : ws) ws_char_code_.encode(out, ws_byte_index(b));
    ws_char_code_.encode(out, kWsEnd);
}

NGramModel::Encoded NGramModel::compress(ByteSpan text) const {
    WordStream stream = tokenize_words(text);
    BitWriter out;
    uint32_t c2 = start_word(), c1 = start_word();
    for (const auto& [word, ws] : stream.pairs) {
        encode_word(out, word, c2, c1);
        encode_ws(out, ws);
        c2 = c1;
        c1 = context_id_of(word);
    }
    Encoded enc;
    enc.bit_count = out.bit_count();
    enc.bytes = out.finish();
    return enc;
}

std::string NGramModel::decode_word(BitReader& in, uint32_t c2, uint32_t c1) const {
    if (auto it = trigram_.find({c2, c1}); it != trigram_.end()) {
        uint32_t sym = it->second.symbols[it->second.code.decode(in)];
        if (sym != unk_word()) return words_[sym];
    }
    if (auto it = bigram_.find(c1); it != bigram_.end()) {
        uint32_t sym = it->second.symbols[it->second.code.decode(in)];
        if (sym != unk_word()) return words_[sym];
    }
    uint32_t sym = unigram_.symbols[unigram_.code.decode(in)];
    if (sym != unk_word()) return words_[sym];

    std::string word;
    while (true) {
        uint32_t c = char_code_.decode(in);
        if (c == kEndOfWord) break;
        word.push_back(static_cast<char>(c));
    }
    return word;
}

std::string NGramModel::decode_ws(BitReader& in) const {
    uint32_t sym = ws_unigram_.symbols[ws_unigram_.code.decode(in)];
    if (sym != unk_ws()) return ws_runs_[sym];
    std::string ws;
    while (true) {
        uint32_t c = ws_char_code_.decode(in);
        if (c == kWsEnd) break;
        ws.push_back(static_cast<char>(kWsBytes[c]));
    }
    return ws;
}

Bytes NGramModel::decompress(ByteSpan bits, uint64_t bit_count, uint64_t original_len) const {
    BitReader in(bits, bit_count);
    Bytes out;
    out.reserve(original_len);
    uint32_t c2 = start_word(), c1 = start_word();
    while (out.size() < original_len) {
        std::string word = decode_word(in, c2, c1);
        std::string ws = decode_ws(in);
        if (word.empty() && ws.empty()) throw CorruptStreamError("ngram: empty token pair");
        out.insert(out.end(), word.begin(), word.end());
        out.insert(out.end(), ws.begin(), ws.end());
        c2 = c1;
        c1 = context_id_of(word);
    }
    if (out.size() != original_len) throw CorruptStreamError("ngram: output overshoots declared length");
    if (in.bits_consumed() != bit_count) throw CorruptStreamError("ngram: trailing bits in stream");
    return out;
}

namespace {
void put_context_code(Bytes& out, const NGramModel::ContextCode& cc) {
    put_u32(out, static_cast<uint32_t>(cc.symbols.size()));
    for (size_t i = 0; i < cc.symbols.size(); ++i) {
        put_u32(out, cc.symbols[i]);
        out.push_back(cc.code.lengths()[i]);
    }
}

NGramModel::ContextCode get_context_code(ByteSpan data, size_t& pos) {
    NGramModel::ContextCode cc;
    uint32_t n = get_u32(data, pos);
    cc.symbols.reserve(n);
    std::vector<uint8_t> lengths(n);
    for (uint32_t i = 0; i < n; ++i) {
        cc.symbols.push_back(get_u32(data, pos));
        if (pos >= data.size()) throw CorruptStreamError("ngram model: truncated");
        lengths[i] = data[pos++];
    }
    if (!std::is_sorted(cc.symbols.begin(), cc.symbols.end()))
        throw CorruptStreamError("ngram model: unsorted context symbols");
    cc.code = CanonicalCode::from_lengths(std::move(lengths));
    return cc;
}
}  // namespace

Bytes NGramModel::serialize() const {
    Bytes out;
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u32(out, 1);  // version

    put_u32(out, static_cast<uint32_t>(words_.size()));
    for (const auto& w : words_) {
        put_varint(out, w.size());
        out.insert(out.end(), w.begin(), w.end());
    }
    put_u32(out, static_cast<uint32_t>(ws_runs_.size()));
    for (const auto& s : ws_runs_) {
        put_varint(out, s.size());
        out.insert(out.end(), s.begin(), s.end());
    }

    put_context_code(out, unigram_);
    put_context_code(out, ws_unigram_);
    for (uint8_t l : char_code_.lengths()) out.push_back(l);
    for (uint8_t l : ws_char_code_.lengths()) out.push_back(l);

    put_u32(out, static_cast<uint32_t>(bigram_.size()));
    for (const auto& [ctx, cc] : bigram_) {
        put_u32(out, ctx);
        put_context_code(out, cc);
    }
    put_u32(out, static_cast<uint32_t>(trigram_.size()));
    for (const auto& [ctx, cc] : trigram_) {
        put_u32(out, ctx.first);
        put_u32(out, ctx.second);
        put_context_code(out, cc);
    }
    return out;
}

NGramModel NGramModel::deserialize(ByteSpan data) {
    size_t pos = 0;
    if (data.size() < 8 || !std::equal(kMagic, kMagic + 4, data.begin()))
        throw CorruptStreamError("ngram model: bad magic");
    pos = 4;
    uint32_t version = get_u32(data, pos);
    if (version != 1) throw CorruptStreamError("ngram model: unsupported version");

    NGramModel m;
    uint32_t word_count = get_u32(data, pos);
    m.words_.reserve(word_count);
    for (uint32_t i = 0; i < word_count; ++i) m.words_.push_back(get_string(data, pos));
    uint32_t ws_count = get_u32(data, pos);
    m.ws_runs_.reserve(ws_count);
    for (uint32_t i = 0; i < ws_count; ++i) m.ws_runs_.push_back(get_string(data, pos));

    m.unigram_ = get_context_code(data, pos);
    m.ws_unigram_ = get_context_code(data, pos);
    std::vector<uint8_t> char_lengths(257), ws_char_lengths(7);
    for (auto& l : char_lengths) {
        if (pos >= data.size()) throw CorruptStreamError("ngram model: truncated");
        l = data[pos++];
    }
    for (auto& l : ws_char_lengths) {
        if (pos >= data.size()) throw CorruptStreamError("ngram model: truncated");
        l = data[pos++];
    }
    m.char_code_ = CanonicalCode::from_lengths(std::move(char_lengths));
    m.ws_char_code_ = CanonicalCode::from_lengths(std::move(ws_char_lengths));

    uint32_t bigram_count = get_u32(data, pos);
    for (uint32_t i = 0; i < bigram_count; ++i) {
        uint32_t ctx = get_u32(data, pos);
        m.bigram_.emplace(ctx, get_context_code(data, pos));
    }
    uint32_t trigram_count = get_u32(data, pos);
    for (uint32_t i = 0; i < trigram_count; ++i) {
        uint32_t a = get_u32(data, pos);
        uint32_t b = get_u32(data, pos);
        m.trigram_.emplace(std::make_pair(a, b), get_context_code(data, pos));
    }
    if (pos != data.size()) throw CorruptStreamError("ngram model: trailing bytes");
    return m;
}

}  // namespace pcdc
