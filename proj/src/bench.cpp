#include "pcdc/bench.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <omp.h>

#include <json.hpp>

#include "pcdc/quant_eval.hpp"

namespace pcdc {

std::string BenchMethod::label() const {
    if (id == "quant") {
        return "quant:" + quantizer + ":b" + std::to_string(bits) + ":k" +
               std::to_string(cfg.order);
    }
    return cfg.label();
}

BenchPlan BenchPlan::from_json(const std::string& text, const std::string& base_dir) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bench plan: bad JSON: ") + e.what());
    }
    if (j.value("version", 0) != 1) throw ConfigError("bench plan: unsupported version");

    auto resolve = [&base_dir](const std::string& p) {
        if (base_dir.empty() || p.empty() || p.front() == '/') return p;
        return base_dir + "/" + p;
    };

    BenchPlan plan;
    plan.threads = j.value("threads", 0u);
    plan.verify_roundtrip = j.value("verify_roundtrip", true);
    plan.external_baseline = j.value("external_baseline", std::string{});
    plan.output_prefix = resolve(j.value("output", std::string{}));

    if (!j.contains("corpora") || !j["corpora"].is_array() || j["corpora"].empty())
        throw ConfigError("bench plan: needs a non-empty corpora array");
    for (const auto& c : j["corpora"]) {
        plan.corpora.emplace_back(c.at("label").get<std::string>(),
                                  resolve(c.at("path").get<std::string>()));
    }

    if (!j.contains("methods") || !j["methods"].is_array() || j["methods"].empty())
        throw ConfigError("bench plan: needs a non-empty methods array");
    for (const auto& mj : j["methods"]) {
        BenchMethod m;
        m.id = mj.at("id").get<std::string>();
        m.cfg.method = m.id == "quant" ? "ac" : m.id;
        m.cfg.order = mj.value("order", 3u);
        m.cfg.capacity_log2 = mj.value("capacity_log2", 20u);
        m.cfg.strategy = mj.value("strategy", std::string("int"));
        if (mj.contains("vocab")) m.cfg.vocab_path = resolve(mj["vocab"].get<std::string>());
        if (mj.contains("model")) m.cfg.model_path = resolve(mj["model"].get<std::string>());
        if (mj.contains("endpoint")) m.cfg.ext_endpoint = mj["endpoint"].get<std::string>();
        m.cfg.ext_timeout_ms = mj.value("timeout_ms", 5000u);
        m.cfg.ext_model_bytes = mj.value("declared_model_bytes", uint64_t{0});
        m.quantizer = mj.value("quantizer", std::string("hqq"));
        m.bits = mj.value("bits", 16u);
        m.group_size = mj.value("group_size", 64u);
        plan.methods.push_back(std::move(m));
    }
    return plan;
}

BenchPlan BenchPlan::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("bench plan: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str(), std::filesystem::path(path).parent_path().string());
}

namespace {

CompressionReport run_cell(const std::string& corpus_label, ByteSpan corpus,
                           const BenchMethod& method, bool verify) {
    if (method.id == "quant") {
        PredictorQuantEvalConfig qcfg;
        qcfg.quantizer = method.quantizer;
        qcfg.bits_list = {method.bits};
        qcfg.model.order = method.cfg.order;
        qcfg.model.capacity_log2 = method.cfg.capacity_log2;
        qcfg.group_size = method.group_size;
        qcfg.corpus_id = corpus_label;
        return quantized_predictor_eval(corpus, qcfg).front();
    }

    Bytes container = compress_with_method(corpus, method.cfg);
    if (verify) {
        Bytes restored = decompress_with_method(container, method.cfg);
        if (restored.size() != corpus.size() ||
            !std::equal(restored.begin(), restored.end(), corpus.begin()))
            throw CorruptStreamError("roundtrip verification failed");
    }
    return CompressionReport::make(corpus_label, method.label(), corpus.size(), container.size(),
                                   method_model_bytes(method.cfg));
}

// Optional system compressor baseline via subprocess; the command sees the
// corpus on stdin and must write the compressed stream to stdout.
CompressionReport run_external_baseline(const std::string& corpus_label,
                                        const std::string& corpus_path, uint64_t original,
                                        const std::string& command) {
    std::string shell = command + " < '" + corpus_path + "' | wc -c";
    FILE* p = ::popen(shell.c_str(), "r");
    if (p == nullptr) throw ConfigError("external baseline: popen failed");
    char buf[64] = {0};
    size_t got = ::fread(buf, 1, sizeof(buf) - 1, p);
    int rc = ::pclose(p);
    if (rc != 0 || got == 0) throw ConfigError("external baseline command failed: " + command);
    uint64_t bytes = std::strtoull(buf, nullptr, 10);
    return CompressionReport::make(corpus_label, "ext:" + command, original, bytes, 0);
}

struct TrendCheck {
    std::vector<std::string> lines;

    void add(const std::string& name, const std::string& corpus, bool pass,
             const std::string& detail) {
        lines.push_back(std::string("TREND ") + name + " corpus=" + corpus + ": " +
                        (pass ? "PASS" : "FAIL") + " (" + detail + ")");
    }
};

std::string fmt_rate(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

void evaluate_trends(const std::vector<CompressionReport>& reports, TrendCheck& trends) {
    std::map<std::string, std::map<uint32_t, double>> ac_by_corpus;      // order -> rate
    std::map<std::string, std::map<std::string, double>> strat_by_corpus;  // strategy -> rate
    std::map<std::pair<std::string, std::string>, std::map<uint32_t, double>> quant_cells;

    for (const auto& r : reports) {
        if (r.status != "ok") continue;
        unsigned k = 0;
        char strat[16] = {0};
        if (std::sscanf(r.method_id.c_str(), "ac:k%u:%15s", &k, strat) == 2) {
            if (std::string(strat) == "int") ac_by_corpus[r.corpus_id][k] = r.gamma_r;
            strat_by_corpus[r.corpus_id][strat] = r.gamma_r;
        }
        char quant[16] = {0};
        unsigned bits = 0, qk = 0;
        if (std::sscanf(r.method_id.c_str(), "quant:%15[^:]:b%u:k%u", quant, &bits, &qk) == 3) {
            quant_cells[{r.corpus_id, quant}][bits] = r.gamma_r;
        }
    }

    for (const auto& [corpus, by_order] : ac_by_corpus) {
        if (by_order.size() < 2) continue;
        bool pass = true;
        std::string detail;
        double prev = -1.0;
        for (const auto& [k, rate] : by_order) {
            if (prev >= 0.0 && rate > prev) pass = false;
            prev = rate;
            detail += "k" + std::to_string(k) + "=" + fmt_rate(rate) + " ";
        }
        trends.add("context-length", corpus, pass, detail + "expected non-increasing");
    }

    for (const auto& [key, by_bits] : quant_cells) {
        if (by_bits.size() < 2) continue;
        // Bits ascend in the map; the rate must be non-increasing in bits,
        // i.e. non-decreasing as quantization gets coarser.
        bool pass = true;
        std::string detail;
        double prev_rate = -1.0;
        for (auto it = by_bits.rbegin(); it != by_bits.rend(); ++it) {
            if (prev_rate >= 0.0 && it->second + 1e-12 < prev_rate) pass = false;
            prev_rate = it->second;
            detail += "b" + std::to_string(it->first) + "=" + fmt_rate(it->second) + " ";
        }
        trends.add("quantization-" + key.second, key.first, pass,
                   detail + "expected non-decreasing as bits shrink");
    }

    for (const auto& [corpus, by_strat] : strat_by_corpus) {
        auto i_int = by_strat.find("int");
        auto i_tok = by_strat.find("bytetok");
        auto i_text = by_strat.find("text");
        if (i_int == by_strat.end() || i_tok == by_strat.end() || i_text == by_strat.end())
            continue;
        bool pass = i_int->second <= i_tok->second && i_tok->second <= i_text->second;
        trends.add("byte-strategy", corpus, pass,
                   "int=" + fmt_rate(i_int->second) + " bytetok=" + fmt_rate(i_tok->second) +
                       " text=" + fmt_rate(i_text->second) + " expected int<=bytetok<=text");
    }
}

}  // namespace

BenchResult run_bench(const BenchPlan& plan) {
    std::vector<Bytes> corpora;
    corpora.reserve(plan.corpora.size());
    for (const auto& [label, path] : plan.corpora) corpora.push_back(read_file(path));

    const size_t n_cells = plan.corpora.size() * plan.methods.size();
    std::vector<CompressionReport> reports(n_cells);

    int threads = plan.threads > 0 ? static_cast<int>(plan.threads) : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (int64_t cell = 0; cell < static_cast<int64_t>(n_cells); ++cell) {
        size_t ci = static_cast<size_t>(cell) / plan.methods.size();
        size_t mi = static_cast<size_t>(cell) % plan.methods.size();
        const auto& [label, path] = plan.corpora[ci];
        try {
            reports[cell] = run_cell(label, corpora[ci], plan.methods[mi], plan.verify_roundtrip);
        } catch (const std::exception& e) {
            CompressionReport r;
            r.corpus_id = label;
            r.method_id = plan.methods[mi].label();
            r.original_bytes = corpora[ci].size();
            r.status = std::string("error: ") + e.what();
            reports[cell] = r;
        }
    }

    BenchResult result;
    result.reports = std::move(reports);

    if (!plan.external_baseline.empty()) {
        for (size_t ci = 0; ci < plan.corpora.size(); ++ci) {
            const auto& [label, path] = plan.corpora[ci];
            try {
                result.reports.push_back(run_external_baseline(label, path, corpora[ci].size(),
                                                               plan.external_baseline));
            } catch (const std::exception& e) {
                CompressionReport r;
                r.corpus_id = label;
                r.method_id = "ext:" + plan.external_baseline;
                r.original_bytes = corpora[ci].size();
                r.status = std::string("error: ") + e.what();
                result.reports.push_back(r);
            }
        }
    }

    TrendCheck trends;
    evaluate_trends(result.reports, trends);
    result.trend_lines = std::move(trends.lines);

    if (!plan.output_prefix.empty()) {
        std::string csv = result.to_csv();
        std::string json = result.to_json();
        write_file_atomic(plan.output_prefix + ".csv",
                          ByteSpan(reinterpret_cast<const uint8_t*>(csv.data()), csv.size()));
        write_file_atomic(plan.output_prefix + ".json",
                          ByteSpan(reinterpret_cast<const uint8_t*>(json.data()), json.size()));
    }
    return result;
}

std::string BenchResult::to_csv() const {
    std::string out = CompressionReport::csv_header() + "\n";
    for (const auto& r : reports) out += r.to_csv_row() + "\n";
    return out;
}

std::string BenchResult::to_json() const {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["reports"] = nlohmann::json::array();
    for (const auto& r : reports) j["reports"].push_back(nlohmann::json::parse(r.to_json()));
    j["trends"] = trend_lines;
    return j.dump(2);
}

}  // namespace pcdc
