#pragma once

#include "pcdc/common.hpp"

namespace pcdc {

// Deterministic corpus synthesis for fixtures and trend experiments.
// Identical (seed, size) always yields identical bytes.
Bytes synth_english_text(uint64_t seed, size_t target_bytes);
Bytes synth_code_text(uint64_t seed, size_t target_bytes);
Bytes synth_pdf_bytes(uint64_t seed, size_t target_bytes);
Bytes synth_multilingual_text(uint64_t seed, size_t target_bytes);

}  // namespace pcdc
