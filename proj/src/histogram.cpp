#include "pcdc/histogram.hpp"

#include <omp.h>

namespace pcdc {

namespace serial {
std::array<uint64_t, 256> count_bytes(ByteSpan data) {
    std::array<uint64_t, 256> hist{};
    for (uint8_t b : data) hist[b] += 1;
    return hist;
}
}  // namespace serial

std::array<uint64_t, 256> count_bytes(ByteSpan data) {
    std::array<uint64_t, 256> hist{};
#pragma omp parallel
    {
        std::array<uint64_t, 256> local{};
#pragma omp for schedule(static) nowait
        for (int64_t i = 0; i < static_cast<int64_t>(data.size()); ++i) {
            local[data[static_cast<size_t>(i)]] += 1;
        }
#pragma omp critical(pcdc_hist_merge)
        {
            for (int v = 0; v < 256; ++v) hist[v] += local[v];
        }
    }
    return hist;
}

}  // namespace pcdc
