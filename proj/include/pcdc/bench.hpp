#pragma once

#include "pcdc/metrics.hpp"
#include "pcdc/pipeline.hpp"

namespace pcdc {

// One method column of the benchmark matrix. Container methods carry a
// MethodConfig; "quant" cells instead run the quantized-predictor
// evaluation at one bit width.
struct BenchMethod {
    std::string id;  // huff0 | ac | ngram | trc | ttc | quant
    MethodConfig cfg;
    std::string quantizer = "hqq";
    uint32_t bits = 16;
    uint32_t group_size = 64;

    std::string label() const;
};

struct BenchPlan {
    std::vector<std::pair<std::string, std::string>> corpora;  // (label, path)
    std::vector<BenchMethod> methods;
    std::string output_prefix;       // writes <prefix>.csv / <prefix>.json
    uint32_t threads = 0;            // 0 = library default worker pool size
    bool verify_roundtrip = true;    // decompress and compare after each cell
    std::string external_baseline;   // optional system compressor command

    static BenchPlan from_json(const std::string& text, const std::string& base_dir = "");
    static BenchPlan from_json_file(const std::string& path);
};

struct BenchResult {
    std::vector<CompressionReport> reports;
    std::vector<std::string> trend_lines;

    std::string to_csv() const;
    std::string to_json() const;
};

// Runs the full (corpus x method) matrix in a bounded worker pool. Cell
// failures are recorded in the report status and do not stop the run.
BenchResult run_bench(const BenchPlan& plan);

}  // namespace pcdc
