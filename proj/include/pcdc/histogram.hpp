#pragma once

#include <array>

#include "pcdc/common.hpp"

namespace pcdc {

// Byte-value histogram, computed with per-thread partials merged in thread
// order. Integer addition keeps the result identical to the serial pass.
std::array<uint64_t, 256> count_bytes(ByteSpan data);

namespace serial {
std::array<uint64_t, 256> count_bytes(ByteSpan data);
}

}  // namespace pcdc
