// Reference implementation of the external-predictor wire protocol, used
// by the test suite and as a template for wrapping real model servers.
// Speaks length-prefixed JSON on stdin/stdout:
//   <- {"alphabet_size": N, "version": 1}     (handshake)
//   -> echo of the handshake
//   <- {"ctx": [ids]}
//   -> {"p": [N floats]}
//
// Modes:
//   uniform   equal probability everywhere
//   peak      P((last_token + 1) mod N) = 0.99, remainder spread uniformly
//   badlen    returns N+1 probabilities (protocol violation, for tests)
//   badsum    returns probabilities summing to 0.5

#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include <json.hpp>

namespace {

bool read_exact(uint8_t* buf, size_t n) {
    size_t off = 0;
    while (off < n) {
        size_t r = std::fread(buf + off, 1, n - off, stdin);
        if (r == 0) return false;
        off += r;
    }
    return true;
}

bool read_frame(std::string& body) {
    uint8_t hdr[4];
    if (!read_exact(hdr, 4)) return false;
    uint32_t len = hdr[0] | (hdr[1] << 8) | (hdr[2] << 16) | (static_cast<uint32_t>(hdr[3]) << 24);
    body.resize(len);
    return len == 0 || read_exact(reinterpret_cast<uint8_t*>(body.data()), len);
}

void write_frame(const std::string& body) {
    uint32_t len = static_cast<uint32_t>(body.size());
    uint8_t hdr[4] = {static_cast<uint8_t>(len), static_cast<uint8_t>(len >> 8),
                      static_cast<uint8_t>(len >> 16), static_cast<uint8_t>(len >> 24)};
    std::fwrite(hdr, 1, 4, stdout);
    std::fwrite(body.data(), 1, body.size(), stdout);
    std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
    std::string mode = argc > 1 ? argv[1] : "uniform";

    std::string body;
    if (!read_frame(body)) return 1;
    nlohmann::json handshake = nlohmann::json::parse(body, nullptr, false);
    if (handshake.is_discarded() || !handshake.contains("alphabet_size")) return 1;
    uint32_t n = handshake["alphabet_size"].get<uint32_t>();
    write_frame(handshake.dump());

    while (read_frame(body)) {
        nlohmann::json req = nlohmann::json::parse(body, nullptr, false);
        if (req.is_discarded() || !req.contains("ctx")) return 1;

        uint32_t out_n = mode == "badlen" ? n + 1 : n;
        std::vector<double> p(out_n, 0.0);
        if (mode == "peak") {
            uint32_t last = req["ctx"].empty() ? n - 1 : req["ctx"].back().get<uint32_t>();
            uint32_t next = (last + 1) % n;
            for (auto& v : p) v = 0.01 / (n - 1);
            p[next] = 0.99;
        } else {
            for (auto& v : p) v = 1.0 / out_n;
        }
        if (mode == "badsum") {
            for (auto& v : p) v *= 0.5;
        }

        nlohmann::json resp;
        resp["p"] = p;
        write_frame(resp.dump());
    }
    return 0;
}
