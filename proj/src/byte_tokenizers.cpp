#include "pcdc/byte_tokenizers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace pcdc {

Utf8Class classify_utf8_byte(uint8_t b) {
    if (b <= 0x7F) return Utf8Class::kAscii;
    if (b <= 0xBF) return Utf8Class::kContinuation;
    if (b == 0xC0 || b == 0xC1) return Utf8Class::kInvalid;
    if (b <= 0xDF) return Utf8Class::kLead2;
    if (b <= 0xEF) return Utf8Class::kLead3;
    if (b <= 0xF4) return Utf8Class::kLead4;
    return Utf8Class::kInvalid;
}

std::vector<uint32_t> tokenize_as_text(ByteSpan bytes) {
    std::vector<uint32_t> tokens;
    tokens.reserve(bytes.size());
    for (uint8_t b : bytes) {
        if (b < 0x80) {
            tokens.push_back(b);
        } else {
            // UTF-8 encoding of U+0080..U+00FF: two bytes.
            tokens.push_back(0xC0u | (b >> 6));
            tokens.push_back(0x80u | (b & 0x3Fu));
        }
    }
    return tokens;
}

Bytes detokenize_as_text(std::span<const uint32_t> tokens) {
    Bytes out;
    out.reserve(tokens.size());
    for (size_t i = 0; i < tokens.size(); ++i) {
        uint32_t t = tokens[i];
        if (t < 0x80) {
            out.push_back(static_cast<uint8_t>(t));
        } else if (t == 0xC2 || t == 0xC3) {
            if (i + 1 >= tokens.size()) throw CorruptStreamError("as_text: dangling lead token");
            uint32_t cont = tokens[++i];
            if ((cont & 0xC0u) != 0x80u) throw CorruptStreamError("as_text: bad continuation token");
            out.push_back(static_cast<uint8_t>(((t & 0x03u) << 6) | (cont & 0x3Fu)));
        } else {
            throw CorruptStreamError("as_text: token outside U+00..U+FF encoding");
        }
    }
    return out;
}

std::vector<uint32_t> tokenize_as_int(ByteSpan bytes) {
    return std::vector<uint32_t>(bytes.begin(), bytes.end());
}

Bytes detokenize_as_int(std::span<const uint32_t> tokens) {
    Bytes out;
    out.reserve(tokens.size());
    for (uint32_t t : tokens) {
        if (t > 0xFF) throw CorruptStreamError("as_int: token exceeds byte range");
        out.push_back(static_cast<uint8_t>(t));
    }
    return out;
}

Vocabulary Vocabulary::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("vocabulary: bad JSON: ") + e.what());
    }
    if (!j.contains("vocab") || !j["vocab"].is_object())
        throw ConfigError("vocabulary: missing \"vocab\" object");
    Vocabulary v;
    for (const auto& [key, value] : j["vocab"].items()) {
        if (!value.is_number_unsigned()) throw ConfigError("vocabulary: token id must be unsigned");
        v.entries[key] = value.get<uint32_t>();
    }
    return v;
}

Vocabulary Vocabulary::from_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("vocabulary: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

ByteMapping ByteMapping::build(const Vocabulary& vocab) {
    ByteMapping m;
    std::array<bool, 256> assigned{};
    std::set<uint32_t> used;

    // Direct entries: every UTF-8-valid byte must have a byte-level token.
    for (int b = 0; b < 256; ++b) {
        if (classify_utf8_byte(static_cast<uint8_t>(b)) == Utf8Class::kInvalid) continue;
        char key[8];
        std::snprintf(key, sizeof(key), "<0x%02X>", b);
        auto it = vocab.entries.find(key);
        if (it == vocab.entries.end())
            throw ConfigError(std::string("byte mapping: vocabulary lacks byte-level token ") + key);
        m.token_of_[b] = it->second;
        m.interpolated_[b] = false;
        assigned[b] = true;
        if (!used.insert(it->second).second)
            throw ConfigError("byte mapping: duplicate byte-token id in vocabulary");
    }

    // Interpolated entries: linear over the nearest valid neighbours, then
    // nudged to the closest unused id. 0xF5-0xFF have no valid byte above,
    // so the slope of the two nearest valid ids below is extended.
    for (int b = 0; b < 256; ++b) {
        if (assigned[b]) continue;
        int below = b - 1;
        while (below >= 0 && !assigned[below]) --below;
        int above = b + 1;
        while (above < 256 && !assigned[above]) ++above;

        double estimate;
        if (below >= 0 && above < 256) {
            double id0 = m.token_of_[below], id1 = m.token_of_[above];
            estimate = id0 + (id1 - id0) * (b - below) / (above - below);
        } else if (below >= 0) {
            int prev = below - 1;
            while (prev >= 0 && !assigned[prev]) --prev;
            double slope = prev >= 0 ? (static_cast<double>(m.token_of_[below]) - m.token_of_[prev]) /
                                           (below - prev)
                                     : 1.0;
            estimate = m.token_of_[below] + slope * (b - below);
        } else if (above < 256) {
            int next = above + 1;
            while (next < 256 && !assigned[next]) ++next;
            double slope = next < 256 ? (static_cast<double>(m.token_of_[next]) - m.token_of_[above]) /
                                            (next - above)
                                      : 1.0;
            estimate = m.token_of_[above] - slope * (above - b);
        } else {
            throw ConfigError("byte mapping: vocabulary has no byte-level tokens");
        }

        // Nearest unused id; ties resolved upward. Negative estimates clamp
        // to zero before the search.
        int64_t center = std::llround(std::max(0.0, estimate));
        uint32_t chosen = 0;
        for (int64_t delta = 0;; ++delta) {
            int64_t up = center + delta;
            if (up >= 0 && !used.count(static_cast<uint32_t>(up))) {
                chosen = static_cast<uint32_t>(up);
                break;
            }
            int64_t down = center - delta;
            if (delta > 0 && down >= 0 && !used.count(static_cast<uint32_t>(down))) {
                chosen = static_cast<uint32_t>(down);
                break;
            }
        }
        used.insert(chosen);
        m.token_of_[b] = chosen;
        m.interpolated_[b] = true;
        assigned[b] = true;
    }

    for (int b = 0; b < 256; ++b) {
        m.inverse_[m.token_of_[b]] = static_cast<uint8_t>(b);
        m.alphabet_size_ = std::max(m.alphabet_size_, m.token_of_[b] + 1);
    }
    if (m.inverse_.size() != 256) throw ConfigError("byte mapping: injectivity violated");
    return m;
}

uint8_t ByteMapping::byte_of(uint32_t token) const {
    auto it = inverse_.find(token);
    if (it == inverse_.end()) throw CorruptStreamError("byte mapping: token has no byte");
    return it->second;
}

std::string ByteMapping::to_csv() const {
    std::string out = "byte,byte_hex,token_id,provenance\n";
    for (int b = 0; b < 256; ++b) {
        char line[64];
        std::snprintf(line, sizeof(line), "%d,0x%02X,%u,%s\n", b, b, token_of_[b],
                      interpolated_[b] ? "interpolated" : "direct");
        out += line;
    }
    return out;
}

std::vector<uint32_t> tokenize_as_byte_tokens(ByteSpan bytes, const ByteMapping& mapping) {
    std::vector<uint32_t> tokens;
    tokens.reserve(bytes.size());
    for (uint8_t b : bytes) tokens.push_back(mapping.token_of(b));
    return tokens;
}

Bytes detokenize_as_byte_tokens(std::span<const uint32_t> tokens, const ByteMapping& mapping) {
    Bytes out;
    out.reserve(tokens.size());
    for (uint32_t t : tokens) out.push_back(mapping.byte_of(t));
    return out;
}

}  // namespace pcdc
