#include "pcdc/quant.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace pcdc {

void WeightMatrix::require_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) throw ConfigError("weight matrix contains non-finite entries");
    }
}

void write_matrix_file(const std::string& path, const WeightMatrix& m) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open matrix file for writing: " + path);
    const char magic[4] = {'P', 'C', 'M', 'X'};
    uint32_t version = 1;
    uint64_t rows = m.rows, cols = m.cols;
    out.write(magic, 4);
    out.write(reinterpret_cast<const char*>(&version), 4);
    out.write(reinterpret_cast<const char*>(&rows), 8);
    out.write(reinterpret_cast<const char*>(&cols), 8);
    out.write(reinterpret_cast<const char*>(m.data.data()),
              static_cast<std::streamsize>(m.data.size() * sizeof(double)));
    if (!out) throw ConfigError("matrix write failed: " + path);
}

WeightMatrix read_matrix_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open matrix file: " + path);
    char magic[4];
    uint32_t version = 0;
    uint64_t rows = 0, cols = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&rows), 8);
    in.read(reinterpret_cast<char*>(&cols), 8);
    if (!in || std::memcmp(magic, "PCMX", 4) != 0) throw ConfigError("bad matrix file magic");
    if (version != 1) throw ConfigError("unsupported matrix file version");
    if (rows * cols > (uint64_t{1} << 28)) throw ConfigError("matrix file too large");
    WeightMatrix m = WeightMatrix::zeros(rows, cols);
    in.read(reinterpret_cast<char*>(m.data.data()),
            static_cast<std::streamsize>(m.data.size() * sizeof(double)));
    if (!in) throw ConfigError("matrix file truncated");
    return m;
}

void QuantGrid::validate() const {
    if (bits != 2 && bits != 3 && bits != 4 && bits != 8)
        throw ConfigError("quant grid: bits must be one of 2, 3, 4, 8");
    if (group_size == 0) throw ConfigError("quant grid: group size must be positive");
}

void HqqConfig::validate() const {
    grid.validate();
    if (!(p > 0.0 && p <= 1.0)) throw ConfigError("hqq: p must be in (0, 1]");
    if (!(beta0 > 0.0)) throw ConfigError("hqq: beta0 must be positive");
    if (!(alpha > 1.0)) throw ConfigError("hqq: alpha must exceed 1");
}

WeightMatrix QuantizedMatrix::dequantize() const {
    WeightMatrix m = WeightMatrix::zeros(rows, cols);
    for (size_t r = 0; r < rows; ++r) {
        for (size_t c = 0; c < cols; ++c) m.at(r, c) = dequant_at(r, c);
    }
    return m;
}

uint64_t QuantizedMatrix::storage_bytes() const {
    uint64_t packed = (static_cast<uint64_t>(rows) * cols * bits + 7) / 8;
    return packed + 16 * static_cast<uint64_t>(scale.size()) + 16;
}

double lp_loss(const WeightMatrix& a, const WeightMatrix& b, double p) {
    double sum = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) sum += std::pow(std::fabs(a.data[i] - b.data[i]), p);
    return sum;
}

double frobenius_error(const WeightMatrix& a, const WeightMatrix& b) {
    double sum = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        double d = a.data[i] - b.data[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

double activation_error(const WeightMatrix& w, const WeightMatrix& wq, const WeightMatrix& x) {
    if (w.rows != wq.rows || w.cols != wq.cols || x.rows != w.cols)
        throw ConfigError("activation_error: shape mismatch");
    double sum = 0.0;
    for (size_t r = 0; r < w.rows; ++r) {
        for (size_t s = 0; s < x.cols; ++s) {
            double acc = 0.0;
            for (size_t c = 0; c < w.cols; ++c) {
                acc += (w.at(r, c) - wq.at(r, c)) * x.at(c, s);
            }
            sum += acc * acc;
        }
    }
    return sum;
}

namespace {

struct GroupGrid {
    double scale;
    double zero;
};

// Min-max affine grid over a row slice. Constant slices collapse to
// s = 1 with z = -min, which reconstructs exactly.
GroupGrid grid_from_slice(const double* w, size_t n, uint32_t max_code) {
    double lo = w[0], hi = w[0];
    for (size_t i = 1; i < n; ++i) {
        lo = std::min(lo, w[i]);
        hi = std::max(hi, w[i]);
    }
    if (hi == lo) return {1.0, -lo};
    double s = (hi - lo) / static_cast<double>(max_code);
    return {s, -lo / s};
}

uint8_t project_code(double w, const GroupGrid& g, uint32_t max_code) {
    long long q = std::llround(w / g.scale + g.zero);
    q = std::max(0ll, std::min<long long>(q, max_code));
    return static_cast<uint8_t>(q);
}

QuantizedMatrix make_output(const WeightMatrix& w, const QuantGrid& grid) {
    QuantizedMatrix q;
    q.rows = w.rows;
    q.cols = w.cols;
    q.bits = grid.bits;
    q.group_size = grid.group_size;
    q.codes.assign(w.rows * w.cols, 0);
    size_t groups = w.rows * ((w.cols + grid.group_size - 1) / grid.group_size);
    q.scale.assign(groups, 1.0);
    q.zero.assign(groups, 0.0);
    return q;
}

void rtn_row(const WeightMatrix& w, const QuantGrid& grid, QuantizedMatrix& q, size_t r) {
    size_t gpr = q.groups_per_row();
    for (size_t g = 0; g < gpr; ++g) {
        size_t c0 = g * grid.group_size;
        size_t c1 = std::min(w.cols, c0 + grid.group_size);
        GroupGrid gg = grid_from_slice(&w.data[r * w.cols + c0], c1 - c0, grid.max_code());
        q.scale[r * gpr + g] = gg.scale;
        q.zero[r * gpr + g] = gg.zero;
        for (size_t c = c0; c < c1; ++c) {
            q.codes[r * w.cols + c] = project_code(w.at(r, c), gg, grid.max_code());
        }
    }
}

// Lower-triangular Cholesky, in place over a dense buffer. Returns false
// when the matrix is not positive definite.
bool cholesky_lower(std::vector<double>& a, size_t n) {
    for (size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (!(d > 0.0)) return false;
        double root = std::sqrt(d);
        a[j * n + j] = root;
        for (size_t i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = s / root;
        }
        for (size_t k = j + 1; k < n; ++k) a[j * n + k] = 0.0;
    }
    return true;
}

// Inverse of an SPD matrix from its lower Cholesky factor L:
// A^{-1} = L^{-T} L^{-1}.
std::vector<double> spd_inverse(const std::vector<double>& l, size_t n) {
    std::vector<double> linv(n * n, 0.0);
    for (size_t j = 0; j < n; ++j) {
        linv[j * n + j] = 1.0 / l[j * n + j];
        for (size_t i = j + 1; i < n; ++i) {
            double s = 0.0;
            for (size_t k = j; k < i; ++k) s -= l[i * n + k] * linv[k * n + j];
            linv[i * n + j] = s / l[i * n + i];
        }
    }
    std::vector<double> inv(n * n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j <= i; ++j) {
            double s = 0.0;
            for (size_t k = i; k < n; ++k) s += linv[k * n + i] * linv[k * n + j];
            inv[i * n + j] = s;
            inv[j * n + i] = s;
        }
    }
    return inv;
}

// Upper-triangular U with U^T U = H^{-1}, following the
// Cholesky-of-the-inverse step. Row j of U drives the error feedback for
// column j.
std::vector<double> gptq_feedback_matrix(const WeightMatrix& x, size_t n, double damping) {
    if (x.rows != n) throw ConfigError("gptq: X rows must match W cols");
    if (x.cols == 0) throw ConfigError("gptq: empty calibration set");

    std::vector<double> h(n * n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j <= i; ++j) {
            double s = 0.0;
            for (size_t k = 0; k < x.cols; ++k) s += x.at(i, k) * x.at(j, k);
            h[i * n + j] = 2.0 * s;
            h[j * n + i] = 2.0 * s;
        }
    }
    double trace = 0.0;
    for (size_t i = 0; i < n; ++i) trace += h[i * n + i];
    double lambda = damping * trace / static_cast<double>(n);
    for (size_t i = 0; i < n; ++i) h[i * n + i] += lambda;

    if (!cholesky_lower(h, n))
        throw ConfigError("gptq: hessian not positive definite; increase damping");
    std::vector<double> hinv = spd_inverse(h, n);
    if (!cholesky_lower(hinv, n))
        throw ConfigError("gptq: inverse hessian not positive definite; increase damping");
    // hinv now holds M with M M^T = H^{-1}; U = M^T.
    std::vector<double> u(n * n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j <= i; ++j) u[j * n + i] = hinv[i * n + j];
    }
    return u;
}

// One row of the GPTQ sweep: quantize columns left to right in blocks,
// feeding the quantization error into the unquantized remainder. The grid
// is refreshed from the updated weights at every group boundary.
void gptq_row(const WeightMatrix& w, const QuantGrid& grid, uint32_t block,
              const std::vector<double>& u, QuantizedMatrix& q, size_t r) {
    const size_t n = w.cols;
    const size_t gpr = q.groups_per_row();
    std::vector<double> row(w.data.begin() + r * n, w.data.begin() + (r + 1) * n);
    std::vector<double> err(block, 0.0);
    GroupGrid gg{1.0, 0.0};

    for (size_t i = 0; i < n; i += block) {
        size_t ib = std::min(n, i + block);
        for (size_t j = i; j < ib; ++j) {
            if (j % grid.group_size == 0) {
                size_t c1 = std::min(n, j + grid.group_size);
                gg = grid_from_slice(&row[j], c1 - j, grid.max_code());
                q.scale[r * gpr + j / grid.group_size] = gg.scale;
                q.zero[r * gpr + j / grid.group_size] = gg.zero;
            }
            uint8_t code = project_code(row[j], gg, grid.max_code());
            q.codes[r * n + j] = code;
            double dq = gg.scale * (static_cast<double>(code) - gg.zero);
            double e = (row[j] - dq) / u[j * n + j];
            err[j - i] = e;
            for (size_t c = j; c < ib; ++c) row[c] -= e * u[j * n + c];
        }
        for (size_t c = ib; c < n; ++c) {
            double acc = 0.0;
            for (size_t j = i; j < ib; ++j) acc += err[j - i] * u[j * n + c];
            row[c] -= acc;
        }
    }
}

double shrink_objective(double w, double x, double beta, double p) {
    double d = w - x;
    return std::pow(std::fabs(w), p) + 0.5 * beta * d * d;
}

// Generalized shrinkage with a monotone guard: keep the previous residual
// entry when the one-step operator would not improve its own objective.
double shrink_step(double x, double w_old, double beta, double p) {
    double cand = 0.0;
    if (x != 0.0) {
        double ax = std::fabs(x);
        double t = ax - (p / beta) * std::pow(ax, p - 1.0);
        if (t > 0.0) cand = (x > 0.0 ? t : -t);
    }
    return shrink_objective(cand, x, beta, p) <= shrink_objective(w_old, x, beta, p) ? cand : w_old;
}

struct HqqWorkspace {
    QuantizedMatrix q;
    std::vector<double> we;
    std::vector<double> resid;  // W - dequant
};

void hqq_codes_for_zero(const WeightMatrix& w, const QuantGrid& grid, QuantizedMatrix& q) {
    size_t gpr = q.groups_per_row();
    for (size_t r = 0; r < w.rows; ++r) {
        for (size_t c = 0; c < w.cols; ++c) {
            size_t g = r * gpr + c / grid.group_size;
            GroupGrid gg{q.scale[g], q.zero[g]};
            q.codes[r * w.cols + c] = project_code(w.at(r, c), gg, grid.max_code());
        }
    }
}

}  // namespace

namespace serial {

QuantizedMatrix rtn_quantize(const WeightMatrix& w, const QuantGrid& grid) {
    w.require_finite();
    grid.validate();
    QuantizedMatrix q = make_output(w, grid);
    for (size_t r = 0; r < w.rows; ++r) rtn_row(w, grid, q, r);
    return q;
}

QuantizedMatrix gptq_quantize(const WeightMatrix& w, const WeightMatrix& x,
                              const GptqConfig& cfg) {
    w.require_finite();
    x.require_finite();
    cfg.grid.validate();
    if (cfg.block_size == 0) throw ConfigError("gptq: block size must be positive");
    std::vector<double> u = gptq_feedback_matrix(x, w.cols, cfg.damping);
    QuantizedMatrix q = make_output(w, cfg.grid);
    for (size_t r = 0; r < w.rows; ++r) gptq_row(w, cfg.grid, cfg.block_size, u, q, r);
    return q;
}

HqqResult hqq_quantize(const WeightMatrix& w, const HqqConfig& cfg) {
    w.require_finite();
    cfg.validate();
    const QuantGrid& grid = cfg.grid;
    QuantizedMatrix q = make_output(w, grid);
    const size_t gpr = q.groups_per_row();

    // Scales frozen from min-max; only the zero-point moves.
    for (size_t r = 0; r < w.rows; ++r) {
        for (size_t g = 0; g < gpr; ++g) {
            size_t c0 = g * grid.group_size;
            size_t c1 = std::min(w.cols, c0 + grid.group_size);
            GroupGrid gg = grid_from_slice(&w.data[r * w.cols + c0], c1 - c0, grid.max_code());
            q.scale[r * gpr + g] = gg.scale;
            q.zero[r * gpr + g] = gg.zero;
        }
    }

    HqqResult result;
    std::vector<double> we(w.data.size(), 0.0);
    std::vector<double> resid(w.data.size(), 0.0);
    double beta = cfg.beta0;

    for (uint32_t iter = 0; iter < cfg.iters; ++iter) {
        hqq_codes_for_zero(w, grid, q);
        for (size_t r = 0; r < w.rows; ++r) {
            for (size_t c = 0; c < w.cols; ++c) {
                resid[r * w.cols + c] = w.at(r, c) - q.dequant_at(r, c);
            }
        }

        double pre = 0.0;
        for (size_t i = 0; i < we.size(); ++i) pre += shrink_objective(we[i], resid[i], beta, cfg.p);

        for (size_t i = 0; i < we.size(); ++i) we[i] = shrink_step(resid[i], we[i], beta, cfg.p);

        // Closed-form zero-point: per-group mean of code - (W - W_e)/s,
        // holding this iteration's codes fixed.
        for (size_t r = 0; r < w.rows; ++r) {
            for (size_t g = 0; g < gpr; ++g) {
                size_t c0 = g * grid.group_size;
                size_t c1 = std::min(w.cols, c0 + grid.group_size);
                double s = q.scale[r * gpr + g];
                double acc = 0.0;
                for (size_t c = c0; c < c1; ++c) {
                    size_t idx = r * w.cols + c;
                    acc += static_cast<double>(q.codes[idx]) - (w.data[idx] - we[idx]) / s;
                }
                q.zero[r * gpr + g] = acc / static_cast<double>(c1 - c0);
            }
        }

        double post = 0.0;
        for (size_t r = 0; r < w.rows; ++r) {
            for (size_t c = 0; c < w.cols; ++c) {
                size_t idx = r * w.cols + c;
                post += shrink_objective(we[idx], w.data[idx] - q.dequant_at(r, c), beta, cfg.p);
            }
        }
        result.objective_trace.emplace_back(pre, post);
        beta *= cfg.alpha;
    }

    hqq_codes_for_zero(w, grid, q);
    result.q = std::move(q);
    return result;
}

}  // namespace serial

QuantizedMatrix rtn_quantize(const WeightMatrix& w, const QuantGrid& grid) {
    w.require_finite();
    grid.validate();
    QuantizedMatrix q = make_output(w, grid);
#pragma omp parallel for schedule(static)
    for (int64_t r = 0; r < static_cast<int64_t>(w.rows); ++r) {
        rtn_row(w, grid, q, static_cast<size_t>(r));
    }
    return q;
}

QuantizedMatrix gptq_quantize(const WeightMatrix& w, const WeightMatrix& x,
                              const GptqConfig& cfg) {
    w.require_finite();
    x.require_finite();
    cfg.grid.validate();
    if (cfg.block_size == 0) throw ConfigError("gptq: block size must be positive");
    std::vector<double> u = gptq_feedback_matrix(x, w.cols, cfg.damping);
    QuantizedMatrix q = make_output(w, cfg.grid);
    // Rows are independent given the feedback matrix.
#pragma omp parallel for schedule(static)
    for (int64_t r = 0; r < static_cast<int64_t>(w.rows); ++r) {
        gptq_row(w, cfg.grid, cfg.block_size, u, q, static_cast<size_t>(r));
    }
    return q;
}

HqqResult hqq_quantize(const WeightMatrix& w, const HqqConfig& cfg) {
    w.require_finite();
    cfg.validate();
    const QuantGrid& grid = cfg.grid;
    QuantizedMatrix q = make_output(w, grid);
    const size_t gpr = q.groups_per_row();
    const size_t total_groups = w.rows * gpr;

#pragma omp parallel for schedule(static)
    for (int64_t gi = 0; gi < static_cast<int64_t>(total_groups); ++gi) {
        size_t r = static_cast<size_t>(gi) / gpr;
        size_t g = static_cast<size_t>(gi) % gpr;
        size_t c0 = g * grid.group_size;
        size_t c1 = std::min(w.cols, c0 + grid.group_size);
        GroupGrid gg = grid_from_slice(&w.data[r * w.cols + c0], c1 - c0, grid.max_code());
        q.scale[gi] = gg.scale;
        q.zero[gi] = gg.zero;
    }

    HqqResult result;
    std::vector<double> we(w.data.size(), 0.0);
    std::vector<double> resid(w.data.size(), 0.0);
    double beta = cfg.beta0;

    for (uint32_t iter = 0; iter < cfg.iters; ++iter) {
#pragma omp parallel for schedule(static)
        for (int64_t gi = 0; gi < static_cast<int64_t>(total_groups); ++gi) {
            size_t r = static_cast<size_t>(gi) / gpr;
            size_t g = static_cast<size_t>(gi) % gpr;
            size_t c0 = g * grid.group_size;
            size_t c1 = std::min(w.cols, c0 + grid.group_size);
            GroupGrid gg{q.scale[gi], q.zero[gi]};
            for (size_t c = c0; c < c1; ++c) {
                size_t idx = r * w.cols + c;
                q.codes[idx] = project_code(w.data[idx], gg, grid.max_code());
                resid[idx] = w.data[idx] - gg.scale * (static_cast<double>(q.codes[idx]) - gg.zero);
            }
        }

        // Objective sums stay serial so the trace is bit-identical to the
        // reference implementation.
        double pre = 0.0;
        for (size_t i = 0; i < we.size(); ++i) pre += shrink_objective(we[i], resid[i], beta, cfg.p);

#pragma omp parallel for schedule(static)
        for (int64_t i = 0; i < static_cast<int64_t>(we.size()); ++i) {
            we[i] = shrink_step(resid[i], we[i], beta, cfg.p);
        }

#pragma omp parallel for schedule(static)
        for (int64_t gi = 0; gi < static_cast<int64_t>(total_groups); ++gi) {
            size_t r = static_cast<size_t>(gi) / gpr;
            size_t g = static_cast<size_t>(gi) % gpr;
            size_t c0 = g * grid.group_size;
            size_t c1 = std::min(w.cols, c0 + grid.group_size);
            double s = q.scale[gi];
            double acc = 0.0;
            for (size_t c = c0; c < c1; ++c) {
                size_t idx = r * w.cols + c;
                acc += static_cast<double>(q.codes[idx]) - (w.data[idx] - we[idx]) / s;
            }
            q.zero[gi] = acc / static_cast<double>(c1 - c0);
        }

        double post = 0.0;
        for (size_t r = 0; r < w.rows; ++r) {
            for (size_t c = 0; c < w.cols; ++c) {
                size_t idx = r * w.cols + c;
                post += shrink_objective(we[idx], w.data[idx] - q.dequant_at(r, c), beta, cfg.p);
            }
        }
        result.objective_trace.emplace_back(pre, post);
        beta *= cfg.alpha;
    }

    hqq_codes_for_zero(w, grid, q);
    result.q = std::move(q);
    return result;
}

}  // namespace pcdc
