#pragma once

#include <map>
#include <optional>
#include <string>

#include "pcdc/bitio.hpp"
#include "pcdc/common.hpp"
#include "pcdc/huffman.hpp"

namespace pcdc {

// Lossless word/whitespace alternation: pairs of (word token, whitespace
// run). Only the first word may be empty (text starting with whitespace)
// and only the last run may be empty (text ending mid-word).
struct WordStream {
    std::vector<std::pair<std::string, std::string>> pairs;
};

bool is_word_whitespace(uint8_t b);
WordStream tokenize_words(ByteSpan text);
Bytes detokenize_words(const WordStream& stream);

struct BitString;  // from token_codecs.hpp

// Trigram -> bigram -> unigram -> character fallback compressor with one
// Huffman tree per context and UNK escapes, plus a parallel unigram ->
// character chain for whitespace runs.
class NGramModel {
public:
    // Per-context codebook: `symbols` lists successor ids ascending (UNK
    // always present); the canonical code indexes positions in that list.
    struct ContextCode {
        std::vector<uint32_t> symbols;
        std::vector<uint64_t> counts;  // build-time only, not serialized
        CanonicalCode code;

        std::optional<uint32_t> position_of(uint32_t symbol) const;
    };

    static NGramModel build(ByteSpan corpus);

    struct Encoded {
        Bytes bytes;
        uint64_t bit_count = 0;
    };
    Encoded compress(ByteSpan text) const;
    Bytes decompress(ByteSpan bits, uint64_t bit_count, uint64_t original_len) const;

    Bytes serialize() const;
    static NGramModel deserialize(ByteSpan data);
    uint64_t serialized_size_bytes() const { return serialize().size(); }

    // Introspection for tests.
    uint32_t word_vocab_size() const { return static_cast<uint32_t>(words_.size()); }
    uint32_t unk_word() const { return word_vocab_size(); }
    uint32_t start_word() const { return word_vocab_size() + 1; }
    uint32_t unk_ws() const { return static_cast<uint32_t>(ws_runs_.size()); }
    const std::map<std::pair<uint32_t, uint32_t>, ContextCode>& trigram() const { return trigram_; }
    const std::map<uint32_t, ContextCode>& bigram() const { return bigram_; }
    const ContextCode& unigram() const { return unigram_; }
    const ContextCode& ws_unigram() const { return ws_unigram_; }
    const CanonicalCode& char_code() const { return char_code_; }
    std::optional<uint32_t> word_id(const std::string& w) const;

    static constexpr uint32_t kEndOfWord = 256;  // char-level terminator
    static constexpr char kMagic[4] = {'N', 'G', 'H', 'M'};

private:
    NGramModel() = default;

    uint32_t context_id_of(const std::string& word) const;
    std::optional<uint32_t> ws_id(const std::string& ws) const;

    void encode_word(BitWriter& out, const std::string& word, uint32_t c2, uint32_t c1) const;
    void encode_ws(BitWriter& out, const std::string& ws) const;
    std::string decode_word(BitReader& in, uint32_t c2, uint32_t c1) const;
    std::string decode_ws(BitReader& in) const;

    std::vector<std::string> words_;    // sorted; index == id
    std::vector<std::string> ws_runs_;  // sorted; index == id
    std::map<std::pair<uint32_t, uint32_t>, ContextCode> trigram_;
    std::map<uint32_t, ContextCode> bigram_;
    ContextCode unigram_;
    ContextCode ws_unigram_;
    CanonicalCode char_code_;     // 256 byte values + kEndOfWord
    CanonicalCode ws_char_code_;  // whitespace bytes + terminator

    // Build-time char counts kept for the optimality tests.
    std::vector<uint64_t> char_counts_;
    std::vector<uint64_t> ws_char_counts_;

public:
    const std::vector<uint64_t>& char_counts() const { return char_counts_; }
};

}  // namespace pcdc
