#pragma once

#include <array>
#include <map>

#include "pcdc/common.hpp"

namespace pcdc {

// Byte-range classification following the UTF-8 encoding table. A byte is
// `invalid` when it can never occur in well-formed UTF-8 (0xC0, 0xC1,
// 0xF5-0xFF); continuation bytes are valid but only inside a sequence.
enum class Utf8Class : uint8_t {
    kAscii,         // 0x00-0x7F
    kContinuation,  // 0x80-0xBF
    kLead2,         // 0xC2-0xDF
    kLead3,         // 0xE0-0xEF
    kLead4,         // 0xF0-0xF4
    kInvalid,       // 0xC0, 0xC1, 0xF5-0xFF
};

Utf8Class classify_utf8_byte(uint8_t b);

// Strategy 1: treat the byte stream as text. Every byte value becomes the
// code point U+0000..U+00FF and the token stream is the UTF-8 encoding of
// those code points, one token per encoded byte (alphabet 256). Bytes
// >= 0x80 expand to two tokens.
std::vector<uint32_t> tokenize_as_text(ByteSpan bytes);
Bytes detokenize_as_text(std::span<const uint32_t> tokens);

// Strategy 2: treat the byte stream as integers; token id == byte value.
std::vector<uint32_t> tokenize_as_int(ByteSpan bytes);
Bytes detokenize_as_int(std::span<const uint32_t> tokens);

// External BPE-style vocabulary: token string -> id. Byte-level fallback
// tokens use the "<0xHH>" convention (uppercase hex).
struct Vocabulary {
    std::map<std::string, uint32_t> entries;

    static Vocabulary from_json_file(const std::string& path);
    static Vocabulary from_json(const std::string& text);
};

// Strategy 3 mapping: byte value -> vocabulary byte-token id. UTF-8-valid
// bytes are looked up directly; invalid bytes are filled by linear
// interpolation over the nearest valid neighbours and nudged to the nearest
// unused id so the map stays injective.
class ByteMapping {
public:
    static ByteMapping build(const Vocabulary& vocab);

    uint32_t token_of(uint8_t byte) const { return token_of_[byte]; }
    bool is_interpolated(uint8_t byte) const { return interpolated_[byte]; }

    // One past the largest token id; predictors over mapped tokens use this
    // as their alphabet size.
    uint32_t alphabet_size() const { return alphabet_size_; }

    // Inverse lookup; throws CorruptStreamError for ids outside the map.
    uint8_t byte_of(uint32_t token) const;

    std::string to_csv() const;

private:
    std::array<uint32_t, 256> token_of_{};
    std::array<bool, 256> interpolated_{};
    std::map<uint32_t, uint8_t> inverse_;
    uint32_t alphabet_size_ = 0;
};

std::vector<uint32_t> tokenize_as_byte_tokens(ByteSpan bytes, const ByteMapping& mapping);
Bytes detokenize_as_byte_tokens(std::span<const uint32_t> tokens, const ByteMapping& mapping);

}  // namespace pcdc
