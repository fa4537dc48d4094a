#pragma once

#include <string>

#include "pcdc/container.hpp"
#include "pcdc/metrics.hpp"

namespace pcdc {

// Everything needed to run one compression method end to end. The digest
// of the canonical parameter string travels in the container; decompression
// with a differently-configured method is refused.
struct MethodConfig {
    std::string method = "ac";  // huff0 | ac | ngram | trc | ttc

    // Built-in adaptive predictor (ac, trc, ttc).
    uint32_t order = 3;
    uint32_t capacity_log2 = 20;

    // Byte-stream tokenization strategy (ac): int | text | bytetok.
    std::string strategy = "int";
    std::string vocab_path;  // required for bytetok

    // n-gram model file (ngram).
    std::string model_path;

    // External predictor endpoint (ac, trc, ttc): "pipe:<command>" or
    // "tcp:<host>:<port>"; empty selects the built-in model.
    std::string ext_endpoint;
    uint32_t ext_timeout_ms = 5000;
    uint64_t ext_model_bytes = 0;

    MethodId method_id() const;
    std::string canonical() const;
    uint64_t digest() const { return fnv1a(canonical()); }
    // Compact method tag used in reports, e.g. "ac:k3:int".
    std::string label() const;
};

// Compresses input into a full container file image; prints nothing.
Bytes compress_with_method(ByteSpan input, const MethodConfig& cfg);

// Inverse. Throws CorruptStreamError / ConfigError on digest mismatch,
// unknown methods or damaged payloads; never returns partial output.
Bytes decompress_with_method(ByteSpan container_file, const MethodConfig& cfg);

// Model-transport bytes a decoder needs for this method: the serialized
// n-gram model, the declared size for external predictors, zero for the
// symmetric adaptive methods.
uint64_t method_model_bytes(const MethodConfig& cfg);

Bytes read_file(const std::string& path);
// Atomic write: temp file in the target directory, then rename.
void write_file_atomic(const std::string& path, ByteSpan data);

}  // namespace pcdc
