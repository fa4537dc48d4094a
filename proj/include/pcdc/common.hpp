#pragma once

#include <cmath>
#include <cstdint>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcdc {

using ByteSpan = std::span<const uint8_t>;
using Bytes = std::vector<uint8_t>;

// Stream-level failures the decoder must surface instead of producing
// garbage output.
class CorruptStreamError : public std::runtime_error {
public:
    explicit CorruptStreamError(const std::string& what) : std::runtime_error(what) {}
};

// External predictor transport failures (timeouts, malformed replies).
class TransportError : public std::runtime_error {
public:
    explicit TransportError(const std::string& what) : std::runtime_error(what) {}
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// FNV-1a, used for context fingerprints and config digests.
constexpr uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr uint64_t kFnvPrime = 0x100000001b3ULL;

inline uint64_t fnv1a(const void* data, size_t n, uint64_t seed = kFnvOffset) {
    const auto* p = static_cast<const uint8_t*>(data);
    uint64_t h = seed;
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= kFnvPrime;
    }
    return h;
}

inline uint64_t fnv1a(const std::string& s, uint64_t seed = kFnvOffset) {
    return fnv1a(s.data(), s.size(), seed);
}

inline void put_varint(Bytes& out, uint64_t v) {
    while (v >= 0x80) {
        out.push_back(static_cast<uint8_t>(v) | 0x80);
        v >>= 7;
    }
    out.push_back(static_cast<uint8_t>(v));
}

inline uint64_t get_varint(ByteSpan data, size_t& pos) {
    uint64_t v = 0;
    int shift = 0;
    while (true) {
        if (pos >= data.size()) throw CorruptStreamError("varint: truncated input");
        if (shift > 63) throw CorruptStreamError("varint: overlong encoding");
        uint8_t b = data[pos++];
        v |= static_cast<uint64_t>(b & 0x7F) << shift;
        if (!(b & 0x80)) return v;
        shift += 7;
    }
}

// Deterministic RNG helpers. std::uniform_*_distribution is not pinned by
// the standard, so fixtures and seeded tests sample through these instead.
class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n), n > 0.
    uint64_t below(uint64_t n) { return next() % n; }

    // Uniform double in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * unit() - 1.0;
            v = 2.0 * unit() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

private:
    uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace pcdc
