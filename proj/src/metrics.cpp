#include "pcdc/metrics.hpp"

#include <cstdio>

#include <json.hpp>

namespace pcdc {

double raw_rate(uint64_t compressed_bytes, uint64_t original_bytes) {
    if (original_bytes == 0) throw ConfigError("raw_rate: original size is zero");
    return static_cast<double>(compressed_bytes) / static_cast<double>(original_bytes);
}

double adjusted_rate(uint64_t compressed_bytes, uint64_t model_bytes, uint64_t original_bytes) {
    if (original_bytes == 0) throw ConfigError("adjusted_rate: original size is zero");
    return static_cast<double>(compressed_bytes + model_bytes) / static_cast<double>(original_bytes);
}

CompressionReport CompressionReport::make(std::string corpus_id, std::string method_id,
                                          uint64_t original_bytes, uint64_t compressed_bytes,
                                          uint64_t model_bytes) {
    CompressionReport r;
    r.corpus_id = std::move(corpus_id);
    r.method_id = std::move(method_id);
    r.original_bytes = original_bytes;
    r.compressed_bytes = compressed_bytes;
    r.model_bytes = model_bytes;
    r.gamma_r = raw_rate(compressed_bytes, original_bytes);
    r.gamma_a = adjusted_rate(compressed_bytes, model_bytes, original_bytes);
    r.bits_per_byte = 8.0 * r.gamma_r;
    return r;
}

std::string CompressionReport::to_json() const {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["corpus"] = corpus_id;
    j["method"] = method_id;
    j["original_bytes"] = original_bytes;
    j["compressed_bytes"] = compressed_bytes;
    j["model_bytes"] = model_bytes;
    j["gamma_r"] = gamma_r;
    j["gamma_a"] = gamma_a;
    j["bits_per_byte"] = bits_per_byte;
    j["status"] = status;
    return j.dump();
}

CompressionReport CompressionReport::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("report: bad JSON: ") + e.what());
    }
    if (j.value("schema_version", 0) != 1) throw ConfigError("report: unsupported schema version");
    CompressionReport r;
    r.corpus_id = j.at("corpus").get<std::string>();
    r.method_id = j.at("method").get<std::string>();
    r.original_bytes = j.at("original_bytes").get<uint64_t>();
    r.compressed_bytes = j.at("compressed_bytes").get<uint64_t>();
    r.model_bytes = j.at("model_bytes").get<uint64_t>();
    r.gamma_r = j.at("gamma_r").get<double>();
    r.gamma_a = j.at("gamma_a").get<double>();
    r.bits_per_byte = j.at("bits_per_byte").get<double>();
    r.status = j.value("status", "ok");
    return r;
}

std::string CompressionReport::csv_header() {
    return "corpus,method,original_bytes,compressed_bytes,model_bytes,gamma_r,gamma_a,bits_per_byte,status";
}

std::string CompressionReport::to_csv_row() const {
    char buf[512];
    std::snprintf(buf, sizeof(buf), "%s,%s,%llu,%llu,%llu,%.9f,%.9f,%.9f,%s",
                  corpus_id.c_str(), method_id.c_str(),
                  static_cast<unsigned long long>(original_bytes),
                  static_cast<unsigned long long>(compressed_bytes),
                  static_cast<unsigned long long>(model_bytes), gamma_r, gamma_a, bits_per_byte,
                  status.c_str());
    return buf;
}

}  // namespace pcdc
