#include "pcdc/container.hpp"

#include <algorithm>

namespace pcdc {

Bytes wrap_container(const ContainerHeader& header, ByteSpan payload) {
    Bytes out;
    out.reserve(32 + payload.size());
    out.insert(out.end(), kContainerMagic, kContainerMagic + 4);
    out.push_back(kContainerVersion);
    out.push_back(static_cast<uint8_t>(header.method));
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(header.config_digest >> (8 * i)));
    put_varint(out, header.original_len);
    put_varint(out, header.payload_bits);
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

ContainerHeader parse_container(ByteSpan file, ByteSpan& payload_out) {
    if (file.size() < 6 || !std::equal(kContainerMagic, kContainerMagic + 4, file.begin()))
        throw CorruptStreamError("container: bad magic");
    if (file[4] != kContainerVersion) throw CorruptStreamError("container: unsupported version");
    uint8_t method = file[5];
    if (method < 1 || method > 5) throw CorruptStreamError("container: unknown method id");

    ContainerHeader h;
    h.method = static_cast<MethodId>(method);
    size_t pos = 6;
    if (file.size() < pos + 8) throw CorruptStreamError("container: truncated header");
    for (int i = 0; i < 8; ++i) h.config_digest |= static_cast<uint64_t>(file[pos + i]) << (8 * i);
    pos += 8;
    h.original_len = get_varint(file, pos);
    h.payload_bits = get_varint(file, pos);
    payload_out = file.subspan(pos);
    if (h.payload_bits > payload_out.size() * 8)
        throw CorruptStreamError("container: payload shorter than declared bit count");
    return h;
}

}  // namespace pcdc
