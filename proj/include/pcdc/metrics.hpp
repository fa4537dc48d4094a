#pragma once

#include <string>

#include "pcdc/common.hpp"

namespace pcdc {

// Raw compression rate: compressed bytes / original bytes.
double raw_rate(uint64_t compressed_bytes, uint64_t original_bytes);

// Adjusted compression rate: (compressed + model) bytes / original bytes.
double adjusted_rate(uint64_t compressed_bytes, uint64_t model_bytes, uint64_t original_bytes);

// One (corpus, method) measurement. Rates are derived from the byte counts
// at construction so they can always be recomputed from the stored fields.
struct CompressionReport {
    std::string corpus_id;
    std::string method_id;
    uint64_t original_bytes = 0;
    uint64_t compressed_bytes = 0;
    uint64_t model_bytes = 0;
    double gamma_r = 0.0;
    double gamma_a = 0.0;
    double bits_per_byte = 0.0;
    std::string status = "ok";  // "ok" or an error note from the bench runner

    static CompressionReport make(std::string corpus_id, std::string method_id,
                                  uint64_t original_bytes, uint64_t compressed_bytes,
                                  uint64_t model_bytes);

    std::string to_json() const;
    static CompressionReport from_json(const std::string& text);

    static std::string csv_header();
    std::string to_csv_row() const;
};

}  // namespace pcdc
