#pragma once

#include <memory>
#include <string>

#include "pcdc/predictor.hpp"

namespace pcdc {

// External next-token predictor endpoint. Messages are length-prefixed
// JSON (4-byte little-endian length, then the JSON bytes), one request in
// flight at a time:
//   handshake:  -> {"alphabet_size": N, "version": 1}
//               <- {"alphabet_size": N, "version": 1}
//   step:       -> {"ctx": [token ids seen so far]}
//               <- {"p": [N floats, summing to 1 within 1e-4]}
struct ExternalPredictorSpec {
    enum class Transport { kPipe, kTcp };
    Transport transport = Transport::kPipe;
    std::string endpoint;  // pipe: command line; tcp: host:port
    uint32_t timeout_ms = 5000;
    uint32_t version = 1;
    uint64_t declared_model_bytes = 0;  // reported for the adjusted rate
};

// Bidirectional byte transport with a receive deadline.
class WireTransport {
public:
    virtual ~WireTransport() = default;
    virtual void send(ByteSpan data) = 0;
    virtual Bytes recv(size_t n) = 0;  // exactly n bytes or TransportError
};

std::unique_ptr<WireTransport> open_pipe_transport(const std::string& command, uint32_t timeout_ms);
std::unique_ptr<WireTransport> open_tcp_transport(const std::string& host_port, uint32_t timeout_ms);

class ExternalPredictor final : public Predictor {
public:
    // Opens the transport and performs the handshake.
    ExternalPredictor(const ExternalPredictorSpec& spec, uint32_t alphabet_size);
    // Adopts an already-open transport (used by tests).
    ExternalPredictor(std::unique_ptr<WireTransport> transport, uint32_t alphabet_size,
                      uint64_t declared_model_bytes, uint32_t version = 1);

    uint32_t alphabet_size() const override { return alphabet_size_; }
    Distribution next_distribution() override;
    void update(uint32_t token) override { context_.push_back(token); }
    uint64_t model_size_bytes() const override { return declared_model_bytes_; }

private:
    void handshake(uint32_t version);
    void send_json(const std::string& body);
    std::string recv_json();

    std::unique_ptr<WireTransport> transport_;
    uint32_t alphabet_size_;
    uint64_t declared_model_bytes_;
    std::vector<uint32_t> context_;
};

}  // namespace pcdc
