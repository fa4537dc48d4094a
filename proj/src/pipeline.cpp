#include "pcdc/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>

#include "pcdc/byte_tokenizers.hpp"
#include "pcdc/histogram.hpp"
#include "pcdc/huffman.hpp"
#include "pcdc/ngram.hpp"
#include "pcdc/predictor.hpp"
#include "pcdc/token_codecs.hpp"
#include "pcdc/wire.hpp"

namespace pcdc {

namespace {

std::string hex64(uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

uint64_t file_digest(const std::string& path) {
    Bytes data = read_file(path);
    return fnv1a(data.data(), data.size());
}

struct StrategyCodec {
    std::string name;
    uint32_t alphabet;
    std::unique_ptr<ByteMapping> mapping;  // bytetok only
};

StrategyCodec make_strategy(const MethodConfig& cfg) {
    StrategyCodec s;
    s.name = cfg.strategy;
    if (cfg.strategy == "int" || cfg.strategy == "text") {
        s.alphabet = 256;
    } else if (cfg.strategy == "bytetok") {
        if (cfg.vocab_path.empty()) throw ConfigError("bytetok strategy needs --vocab");
        s.mapping = std::make_unique<ByteMapping>(
            ByteMapping::build(Vocabulary::from_json_file(cfg.vocab_path)));
        s.alphabet = s.mapping->alphabet_size();
    } else {
        throw ConfigError("unknown byte strategy: " + cfg.strategy);
    }
    return s;
}

std::vector<uint32_t> strategy_tokenize(const StrategyCodec& s, ByteSpan input) {
    if (s.name == "int") return tokenize_as_int(input);
    if (s.name == "text") return tokenize_as_text(input);
    return tokenize_as_byte_tokens(input, *s.mapping);
}

std::unique_ptr<Predictor> make_predictor(const MethodConfig& cfg, uint32_t alphabet) {
    if (cfg.ext_endpoint.empty()) {
        ContextModelConfig mc;
        mc.order = cfg.order;
        mc.capacity_log2 = cfg.capacity_log2;
        return std::make_unique<OrderKModel>(mc, alphabet);
    }
    ExternalPredictorSpec spec;
    if (cfg.ext_endpoint.rfind("pipe:", 0) == 0) {
        spec.transport = ExternalPredictorSpec::Transport::kPipe;
        spec.endpoint = cfg.ext_endpoint.substr(5);
    } else if (cfg.ext_endpoint.rfind("tcp:", 0) == 0) {
        spec.transport = ExternalPredictorSpec::Transport::kTcp;
        spec.endpoint = cfg.ext_endpoint.substr(4);
    } else {
        throw ConfigError("external endpoint must start with pipe: or tcp:");
    }
    spec.timeout_ms = cfg.ext_timeout_ms;
    spec.declared_model_bytes = cfg.ext_model_bytes;
    return std::make_unique<ExternalPredictor>(spec, alphabet);
}

// ---- order-0 static Huffman baseline -------------------------------------
// Payload: 256 code lengths, then the packed codewords.

Bytes huff0_encode(ByteSpan input, uint64_t& payload_bits) {
    auto hist = count_bytes(input);
    // Floor so every byte value stays encodable regardless of content.
    for (auto& c : hist) c += 1;
    CanonicalCode code = CanonicalCode::from_counts(hist);

    BitWriter bits;
    for (uint8_t b : input) code.encode(bits, b);
    uint64_t coded_bits = bits.bit_count();
    Bytes coded = bits.finish();

    Bytes payload;
    payload.reserve(256 + coded.size());
    payload.insert(payload.end(), code.lengths().begin(), code.lengths().end());
    payload.insert(payload.end(), coded.begin(), coded.end());
    payload_bits = 256 * 8 + coded_bits;
    return payload;
}

Bytes huff0_decode(ByteSpan payload, uint64_t payload_bits, uint64_t original_len) {
    if (payload.size() < 256) throw CorruptStreamError("huff0: missing length table");
    CanonicalCode code =
        CanonicalCode::from_lengths(std::vector<uint8_t>(payload.begin(), payload.begin() + 256));
    BitReader bits(payload.subspan(256), payload_bits - 256 * 8);
    Bytes out;
    out.reserve(original_len);
    for (uint64_t i = 0; i < original_len; ++i) out.push_back(static_cast<uint8_t>(code.decode(bits)));
    return out;
}

// ---- adaptive arithmetic over a byte-tokenization strategy ---------------

Bytes ac_encode(ByteSpan input, const MethodConfig& cfg, const StrategyCodec& strat) {
    std::vector<uint32_t> tokens = strategy_tokenize(strat, input);
    auto predictor = make_predictor(cfg, strat.alphabet);
    RangeEncoder enc;
    for (uint32_t t : tokens) {
        enc.encode(predictor->next_distribution(), t);
        predictor->update(t);
    }
    return enc.finish();
}

Bytes ac_decode(ByteSpan payload, uint64_t original_len, const MethodConfig& cfg,
                const StrategyCodec& strat) {
    auto predictor = make_predictor(cfg, strat.alphabet);
    RangeDecoder dec(payload);
    Bytes out;
    out.reserve(original_len);
    auto next_token = [&]() {
        uint32_t t = dec.decode(predictor->next_distribution());
        predictor->update(t);
        return t;
    };
    if (strat.name == "int") {
        for (uint64_t i = 0; i < original_len; ++i) out.push_back(static_cast<uint8_t>(next_token()));
    } else if (strat.name == "text") {
        while (out.size() < original_len) {
            uint32_t t = next_token();
            if (t < 0x80) {
                out.push_back(static_cast<uint8_t>(t));
            } else if (t == 0xC2 || t == 0xC3) {
                uint32_t cont = next_token();
                if ((cont & 0xC0u) != 0x80u) throw CorruptStreamError("ac: bad continuation token");
                out.push_back(static_cast<uint8_t>(((t & 0x03u) << 6) | (cont & 0x3Fu)));
            } else {
                throw CorruptStreamError("ac: invalid text token");
            }
        }
    } else {
        for (uint64_t i = 0; i < original_len; ++i) out.push_back(strat.mapping->byte_of(next_token()));
    }
    return out;
}

}  // namespace

MethodId MethodConfig::method_id() const {
    if (method == "huff0") return MethodId::kHuff0;
    if (method == "ac") return MethodId::kAc;
    if (method == "ngram") return MethodId::kNgram;
    if (method == "trc") return MethodId::kTrc;
    if (method == "ttc") return MethodId::kTtc;
    throw ConfigError("unknown method: " + method);
}

std::string MethodConfig::canonical() const {
    method_id();  // validates the name
    std::string s = "method=" + method + ";v=1";
    if (method == "huff0") return s;
    if (method == "ngram") {
        if (model_path.empty()) throw ConfigError("ngram method needs --model");
        return s + ";model=" + hex64(file_digest(model_path));
    }
    if (method == "ac") {
        s += ";strategy=" + strategy;
        if (strategy == "bytetok") {
            if (vocab_path.empty()) throw ConfigError("bytetok strategy needs --vocab");
            s += ";vocab=" + hex64(file_digest(vocab_path));
        }
    }
    if (ext_endpoint.empty()) {
        s += ";predictor=builtin;order=" + std::to_string(order) +
             ";cap=" + std::to_string(capacity_log2);
    } else {
        // The endpoint address is operational, not semantic: two endpoints
        // serving the same model must interoperate.
        s += ";predictor=ext;decl=" + std::to_string(ext_model_bytes);
    }
    return s;
}

std::string MethodConfig::label() const {
    if (method == "huff0") return "huff0";
    if (method == "ngram") return "ngram";
    std::string s = method;
    if (ext_endpoint.empty()) {
        s += ":k" + std::to_string(order);
    } else {
        s += ":ext";
    }
    if (method == "ac") s += ":" + strategy;
    return s;
}

uint64_t method_model_bytes(const MethodConfig& cfg) {
    if (cfg.method == "ngram") {
        Bytes model = read_file(cfg.model_path);
        return model.size();
    }
    if (!cfg.ext_endpoint.empty()) return cfg.ext_model_bytes;
    return 0;
}

Bytes compress_with_method(ByteSpan input, const MethodConfig& cfg) {
    ContainerHeader h;
    h.method = cfg.method_id();
    h.config_digest = cfg.digest();
    h.original_len = input.size();

    Bytes payload;
    if (input.empty()) {
        h.payload_bits = 0;
        return wrap_container(h, payload);
    }

    switch (h.method) {
        case MethodId::kHuff0:
            payload = huff0_encode(input, h.payload_bits);
            break;
        case MethodId::kAc: {
            StrategyCodec strat = make_strategy(cfg);
            payload = ac_encode(input, cfg, strat);
            h.payload_bits = payload.size() * 8;
            break;
        }
        case MethodId::kNgram: {
            NGramModel model = NGramModel::deserialize(read_file(cfg.model_path));
            NGramModel::Encoded enc = model.compress(input);
            payload = std::move(enc.bytes);
            h.payload_bits = enc.bit_count;
            break;
        }
        case MethodId::kTrc: {
            std::vector<uint32_t> tokens = tokenize_as_int(input);
            auto predictor = make_predictor(cfg, 256);
            payload = trc_encode(*predictor, tokens);
            h.payload_bits = payload.size() * 8;
            break;
        }
        case MethodId::kTtc: {
            std::vector<uint32_t> tokens = tokenize_as_int(input);
            auto predictor = make_predictor(cfg, 256);
            BitString bits = ttc_encode(*predictor, tokens);
            payload = std::move(bits.bytes);
            h.payload_bits = bits.bit_count;
            break;
        }
    }
    return wrap_container(h, payload);
}

Bytes decompress_with_method(ByteSpan container_file, const MethodConfig& cfg) {
    ByteSpan payload;
    ContainerHeader h = parse_container(container_file, payload);
    if (h.method != cfg.method_id())
        throw ConfigError("container method does not match the requested method");
    if (h.config_digest != cfg.digest())
        throw ConfigError("config digest mismatch: stream was written with different parameters");

    if (h.original_len == 0) return {};

    Bytes out;
    switch (h.method) {
        case MethodId::kHuff0:
            out = huff0_decode(payload, h.payload_bits, h.original_len);
            break;
        case MethodId::kAc: {
            StrategyCodec strat = make_strategy(cfg);
            out = ac_decode(payload, h.original_len, cfg, strat);
            break;
        }
        case MethodId::kNgram: {
            NGramModel model = NGramModel::deserialize(read_file(cfg.model_path));
            out = model.decompress(payload, h.payload_bits, h.original_len);
            break;
        }
        case MethodId::kTrc: {
            auto predictor = make_predictor(cfg, 256);
            std::vector<uint32_t> tokens = trc_decode(*predictor, payload, h.original_len);
            out = detokenize_as_int(tokens);
            break;
        }
        case MethodId::kTtc: {
            auto predictor = make_predictor(cfg, 256);
            BitString bits;
            bits.bytes.assign(payload.begin(), payload.end());
            bits.bit_count = h.payload_bits;
            std::vector<uint32_t> tokens = ttc_decode(*predictor, bits, h.original_len);
            out = detokenize_as_int(tokens);
            break;
        }
    }
    if (out.size() != h.original_len)
        throw CorruptStreamError("decoded length does not match container header");
    return out;
}

Bytes read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path);
    in.seekg(0, std::ios::end);
    std::streamoff len = in.tellg();
    in.seekg(0, std::ios::beg);
    Bytes data(static_cast<size_t>(len));
    if (len > 0) in.read(reinterpret_cast<char*>(data.data()), len);
    if (!in) throw ConfigError("read failed: " + path);
    return data;
}

void write_file_atomic(const std::string& path, ByteSpan data) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot open file for writing: " + tmp.string());
        out.write(reinterpret_cast<const char*>(data.data()),
                  static_cast<std::streamsize>(data.size()));
        if (!out) {
            fs::remove(tmp);
            throw ConfigError("write failed: " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw ConfigError("rename failed: " + ec.message());
    }
}

}  // namespace pcdc
