#pragma once

#include <string>

#include "pcdc/common.hpp"

namespace pcdc {

struct WeightMatrix {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> data;  // row-major

    static WeightMatrix zeros(size_t rows, size_t cols) {
        return WeightMatrix{rows, cols, std::vector<double>(rows * cols, 0.0)};
    }
    double& at(size_t r, size_t c) { return data[r * cols + c]; }
    double at(size_t r, size_t c) const { return data[r * cols + c]; }
    void require_finite() const;
};

// Matrix fixture file: "PCMX", u32 version, u64 rows, u64 cols, then
// row-major float64 payload, all little-endian.
void write_matrix_file(const std::string& path, const WeightMatrix& m);
WeightMatrix read_matrix_file(const std::string& path);

// Affine quantization grid: groups of `group_size` consecutive weights
// along each row share one (scale, zero) pair. Scales come from per-group
// min-max: s = (max-min)/(2^bits - 1), z = -min/s.
struct QuantGrid {
    uint32_t bits = 4;        // one of 2, 3, 4, 8
    uint32_t group_size = 64;

    void validate() const;
    uint32_t max_code() const { return (1u << bits) - 1; }
};

struct QuantizedMatrix {
    size_t rows = 0;
    size_t cols = 0;
    uint32_t bits = 0;
    uint32_t group_size = 0;
    std::vector<uint8_t> codes;  // row-major, one code per weight
    std::vector<double> scale;   // per (row, group)
    std::vector<double> zero;

    size_t groups_per_row() const { return (cols + group_size - 1) / group_size; }
    double dequant_at(size_t r, size_t c) const {
        size_t g = r * groups_per_row() + c / group_size;
        return scale[g] * (static_cast<double>(codes[r * cols + c]) - zero[g]);
    }
    WeightMatrix dequantize() const;

    // Packed parameter bytes plus grid metadata (two doubles per group and
    // a 16-byte header); the model-size term of the adjusted rate.
    uint64_t storage_bytes() const;
};

// Round-to-nearest baseline, Eq.-(8/9)-style affine projection.
QuantizedMatrix rtn_quantize(const WeightMatrix& w, const QuantGrid& grid);

struct GptqConfig {
    QuantGrid grid;
    uint32_t block_size = 8;  // columns per block
    double damping = 0.01;    // lambda = damping * mean(diag(2 X X^T))
};

// Calibration-based columnwise quantization with error feedback. X holds
// calibration activations, one column per sample, X.rows == w.cols.
QuantizedMatrix gptq_quantize(const WeightMatrix& w, const WeightMatrix& x,
                              const GptqConfig& cfg);

struct HqqConfig {
    QuantGrid grid;
    double p = 0.7;       // sparsity norm exponent of the outlier loss
    double beta0 = 10.0;  // initial half-quadratic penalty
    double alpha = 1.1;   // penalty growth, > 1
    uint32_t iters = 20;

    void validate() const;
};

struct HqqResult {
    QuantizedMatrix q;
    // Half-quadratic objective phi(W_e) + beta/2 ||W_e - (W - dequant)||^2
    // evaluated before and after each iteration's update pair, at that
    // iteration's codes and beta. Descent holds per pair.
    std::vector<std::pair<double, double>> objective_trace;
};

// Calibration-free quantization: scale frozen at min-max, zero-point
// optimized by alternating a guarded generalized-shrinkage step on the
// outlier residual W_e with the closed-form zero-point update.
HqqResult hqq_quantize(const WeightMatrix& w, const HqqConfig& cfg);

// sum |a - b|^p over all entries; the outlier-weighted alignment loss.
double lp_loss(const WeightMatrix& a, const WeightMatrix& b, double p);

// ||W X - Wq X||_F^2, the layerwise activation objective.
double activation_error(const WeightMatrix& w, const WeightMatrix& wq, const WeightMatrix& x);

double frobenius_error(const WeightMatrix& a, const WeightMatrix& b);

// Serial reference implementations, kept for equivalence testing against
// the OpenMP kernels above. Outputs are bit-identical.
namespace serial {
QuantizedMatrix rtn_quantize(const WeightMatrix& w, const QuantGrid& grid);
QuantizedMatrix gptq_quantize(const WeightMatrix& w, const WeightMatrix& x,
                              const GptqConfig& cfg);
HqqResult hqq_quantize(const WeightMatrix& w, const HqqConfig& cfg);
}  // namespace serial

}  // namespace pcdc
