#pragma once

#include "pcdc/common.hpp"

namespace pcdc {

// Compressed-file container: magic "PCDC", format version, method id, a
// digest of the canonicalized method parameters, the original byte length
// and the semantic payload bit length. The decoder refuses payloads whose
// digest does not match its own configuration.
enum class MethodId : uint8_t {
    kHuff0 = 1,
    kAc = 2,
    kNgram = 3,
    kTrc = 4,
    kTtc = 5,
};

struct ContainerHeader {
    MethodId method;
    uint64_t config_digest = 0;
    uint64_t original_len = 0;
    uint64_t payload_bits = 0;
};

constexpr char kContainerMagic[4] = {'P', 'C', 'D', 'C'};
constexpr uint8_t kContainerVersion = 1;

Bytes wrap_container(const ContainerHeader& header, ByteSpan payload);

// Parses and validates the fixed part; payload_out receives the remainder.
ContainerHeader parse_container(ByteSpan file, ByteSpan& payload_out);

}  // namespace pcdc
