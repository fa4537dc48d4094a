#include "pcdc/wire.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

namespace pcdc {

namespace {

void write_all(int fd, const uint8_t* data, size_t n) {
    size_t off = 0;
    while (off < n) {
        ssize_t w = ::write(fd, data + off, n - off);
        if (w < 0) {
            if (errno == EINTR) continue;
            throw TransportError(std::string("write failed: ") + std::strerror(errno));
        }
        off += static_cast<size_t>(w);
    }
}

Bytes read_exactly(int fd, size_t n, uint32_t timeout_ms) {
    Bytes out;
    out.resize(n);
    size_t off = 0;
    while (off < n) {
        struct pollfd pfd{fd, POLLIN, 0};
        int pr = ::poll(&pfd, 1, static_cast<int>(timeout_ms));
        if (pr == 0) throw TransportError("predictor response timed out");
        if (pr < 0) {
            if (errno == EINTR) continue;
            throw TransportError(std::string("poll failed: ") + std::strerror(errno));
        }
        ssize_t r = ::read(fd, out.data() + off, n - off);
        if (r == 0) throw TransportError("predictor closed the connection");
        if (r < 0) {
            if (errno == EINTR) continue;
            throw TransportError(std::string("read failed: ") + std::strerror(errno));
        }
        off += static_cast<size_t>(r);
    }
    return out;
}

class PipeTransport final : public WireTransport {
public:
    PipeTransport(const std::string& command, uint32_t timeout_ms) : timeout_ms_(timeout_ms) {
        int to_child[2], from_child[2];
        if (::pipe(to_child) != 0 || ::pipe(from_child) != 0)
            throw TransportError("pipe creation failed");
        pid_ = ::fork();
        if (pid_ < 0) throw TransportError("fork failed");
        if (pid_ == 0) {
            ::dup2(to_child[0], STDIN_FILENO);
            ::dup2(from_child[1], STDOUT_FILENO);
            ::close(to_child[0]);
            ::close(to_child[1]);
            ::close(from_child[0]);
            ::close(from_child[1]);
            ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
            _exit(127);
        }
        ::close(to_child[0]);
        ::close(from_child[1]);
        wfd_ = to_child[1];
        rfd_ = from_child[0];
        ::signal(SIGPIPE, SIG_IGN);
    }

    ~PipeTransport() override {
        if (wfd_ >= 0) ::close(wfd_);
        if (rfd_ >= 0) ::close(rfd_);
        if (pid_ > 0) {
            ::kill(pid_, SIGTERM);
            int status = 0;
            ::waitpid(pid_, &status, 0);
        }
    }

    void send(ByteSpan data) override { write_all(wfd_, data.data(), data.size()); }
    Bytes recv(size_t n) override { return read_exactly(rfd_, n, timeout_ms_); }

private:
    pid_t pid_ = -1;
    int wfd_ = -1;
    int rfd_ = -1;
    uint32_t timeout_ms_;
};

class TcpTransport final : public WireTransport {
public:
    TcpTransport(const std::string& host_port, uint32_t timeout_ms) : timeout_ms_(timeout_ms) {
        auto colon = host_port.rfind(':');
        if (colon == std::string::npos) throw ConfigError("tcp endpoint must be host:port");
        std::string host = host_port.substr(0, colon);
        std::string port = host_port.substr(colon + 1);

        struct addrinfo hints{};
        hints.ai_family = AF_UNSPEC;
        hints.ai_socktype = SOCK_STREAM;
        struct addrinfo* res = nullptr;
        int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res);
        if (rc != 0) throw TransportError(std::string("resolve failed: ") + gai_strerror(rc));
        for (struct addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
            fd_ = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
            if (fd_ < 0) continue;
            if (::connect(fd_, ai->ai_addr, ai->ai_addrlen) == 0) break;
            ::close(fd_);
            fd_ = -1;
        }
        ::freeaddrinfo(res);
        if (fd_ < 0) throw TransportError("cannot connect to " + host_port);
        ::signal(SIGPIPE, SIG_IGN);
    }

    ~TcpTransport() override {
        if (fd_ >= 0) ::close(fd_);
    }

    void send(ByteSpan data) override { write_all(fd_, data.data(), data.size()); }
    Bytes recv(size_t n) override { return read_exactly(fd_, n, timeout_ms_); }

private:
    int fd_ = -1;
    uint32_t timeout_ms_;
};

}  // namespace

std::unique_ptr<WireTransport> open_pipe_transport(const std::string& command, uint32_t timeout_ms) {
    return std::make_unique<PipeTransport>(command, timeout_ms);
}

std::unique_ptr<WireTransport> open_tcp_transport(const std::string& host_port, uint32_t timeout_ms) {
    return std::make_unique<TcpTransport>(host_port, timeout_ms);
}

ExternalPredictor::ExternalPredictor(const ExternalPredictorSpec& spec, uint32_t alphabet_size)
    : alphabet_size_(alphabet_size), declared_model_bytes_(spec.declared_model_bytes) {
    transport_ = spec.transport == ExternalPredictorSpec::Transport::kPipe
                     ? open_pipe_transport(spec.endpoint, spec.timeout_ms)
                     : open_tcp_transport(spec.endpoint, spec.timeout_ms);
    handshake(spec.version);
}

ExternalPredictor::ExternalPredictor(std::unique_ptr<WireTransport> transport,
                                     uint32_t alphabet_size, uint64_t declared_model_bytes,
                                     uint32_t version)
    : transport_(std::move(transport)),
      alphabet_size_(alphabet_size),
      declared_model_bytes_(declared_model_bytes) {
    handshake(version);
}

void ExternalPredictor::send_json(const std::string& body) {
    Bytes frame;
    uint32_t len = static_cast<uint32_t>(body.size());
    frame.push_back(static_cast<uint8_t>(len));
    frame.push_back(static_cast<uint8_t>(len >> 8));
    frame.push_back(static_cast<uint8_t>(len >> 16));
    frame.push_back(static_cast<uint8_t>(len >> 24));
    frame.insert(frame.end(), body.begin(), body.end());
    transport_->send(frame);
}

std::string ExternalPredictor::recv_json() {
    Bytes hdr = transport_->recv(4);
    uint32_t len = hdr[0] | (hdr[1] << 8) | (hdr[2] << 16) | (static_cast<uint32_t>(hdr[3]) << 24);
    if (len > (64u << 20)) throw TransportError("predictor frame too large");
    Bytes body = transport_->recv(len);
    return std::string(body.begin(), body.end());
}

void ExternalPredictor::handshake(uint32_t version) {
    nlohmann::json req;
    req["alphabet_size"] = alphabet_size_;
    req["version"] = version;
    send_json(req.dump());
    nlohmann::json resp;
    try {
        resp = nlohmann::json::parse(recv_json());
    } catch (const nlohmann::json::exception& e) {
        throw TransportError(std::string("handshake: bad JSON: ") + e.what());
    }
    if (resp.value("alphabet_size", 0u) != alphabet_size_)
        throw TransportError("handshake: alphabet size mismatch");
    if (resp.value("version", 0u) != version)
        throw TransportError("handshake: version mismatch");
}

Distribution ExternalPredictor::next_distribution() {
    nlohmann::json req;
    req["ctx"] = context_;
    send_json(req.dump());
    nlohmann::json resp;
    try {
        resp = nlohmann::json::parse(recv_json());
    } catch (const nlohmann::json::exception& e) {
        throw TransportError(std::string("predict: bad JSON: ") + e.what());
    }
    if (!resp.contains("p") || !resp["p"].is_array())
        throw TransportError("predict: response lacks probability vector");
    std::vector<double> p;
    p.reserve(resp["p"].size());
    for (const auto& v : resp["p"]) {
        if (!v.is_number()) throw TransportError("predict: non-numeric probability");
        p.push_back(v.get<double>());
    }
    if (p.size() != alphabet_size_)
        throw TransportError("predict: probability vector has wrong length");
    try {
        return quantize_probabilities(p);
    } catch (const ConfigError& e) {
        throw TransportError(std::string("predict: ") + e.what());
    }
}

}  // namespace pcdc
