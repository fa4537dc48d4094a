#pragma once

#include <memory>

#include "pcdc/coder.hpp"
#include "pcdc/common.hpp"

namespace pcdc {

// Supplies one Distribution per coding step. Implementations must be
// deterministic in the observed token history: the decoder replays
// update() with decoded tokens and must see the exact distributions the
// encoder saw.
class Predictor {
public:
    virtual ~Predictor() = default;

    virtual uint32_t alphabet_size() const = 0;

    // Distribution for the next token given everything update() has seen.
    virtual Distribution next_distribution() = 0;

    // Observe the true next token. Called identically on both coding paths.
    virtual void update(uint32_t token) = 0;

    // Bytes a decoder would need to receive alongside the stream. Zero for
    // models that start empty and adapt symmetrically.
    virtual uint64_t model_size_bytes() const = 0;
};

// Deterministic fixed-point projection of a real probability vector:
// sum(freq) == kTotal exactly, freq >= 1 everywhere, largest-remainder
// rounding with ties to the lower index.
Distribution quantize_probabilities(std::span<const double> p);

struct ContextModelConfig {
    uint32_t order = 2;           // max context length in tokens, 0..12
    uint32_t capacity_log2 = 20;  // context hash table capacity, power of two

    void validate() const;
};

// Adaptive context model with PPM-style escape blending: counts from the
// longest matching context are mixed down to order 0, with each order's
// escape weight equal to distinct-successors / (total + distinct), and the
// leftover weight spread uniformly.
class OrderKModel final : public Predictor {
public:
    OrderKModel(ContextModelConfig config, uint32_t alphabet_size);

    uint32_t alphabet_size() const override { return alphabet_size_; }
    Distribution next_distribution() override;
    void update(uint32_t token) override;
    uint64_t model_size_bytes() const override;

    // Pure lookup used by tests and one-shot callers; does not touch the
    // internal history.
    Distribution predict_for(std::span<const uint32_t> context) const;

    // Bulk-observe a token stream (adaptive path), e.g. for pre-training
    // before freezing. Clears the rolling history afterwards.
    void train(std::span<const uint32_t> tokens);

    // In frozen mode update() only advances the rolling context; counts
    // stay fixed. Used by the quantization lab.
    void set_frozen(bool frozen) { frozen_ = frozen; }
    bool frozen() const { return frozen_; }

    // A pristine decoder-side twin: same config, same frozen tables (if
    // any), empty history.
    std::unique_ptr<OrderKModel> spawn_decoder_twin() const;

    // Sparse count table exposed as (order, context_key, symbol, count)
    // rows in deterministic order, for parameter export.
    struct CountRow {
        uint32_t order;
        uint64_t context_key;
        uint32_t symbol;
        uint32_t count;
    };
    std::vector<CountRow> export_counts() const;
    // Replace all counts. Rows with count == 0 are dropped.
    void import_counts(std::span<const CountRow> rows);

    const ContextModelConfig& config() const { return config_; }

private:
    struct ContextStats {
        uint64_t total = 0;
        std::vector<std::pair<uint32_t, uint32_t>> counts;  // (symbol, count), sorted

        void bump(uint32_t symbol);
        const uint32_t* find(uint32_t symbol) const;
    };

    // Open-addressing map from context fingerprint to stats index.
    // Capacity is fixed; once the load cap is reached, new contexts are
    // ignored (deterministically) and existing ones keep adapting.
    struct ContextTable {
        explicit ContextTable(uint32_t capacity_log2);
        ContextStats* find(uint64_t key);
        const ContextStats* find(uint64_t key) const;
        ContextStats* find_or_insert(uint64_t key);

        std::vector<uint64_t> keys;
        std::vector<uint32_t> slot_to_stats;
        std::vector<ContextStats> stats;
        std::vector<uint64_t> stats_keys;  // parallel to stats, for export
        uint64_t mask;
        size_t max_entries;
    };

    uint64_t context_fingerprint(uint32_t order, std::span<const uint32_t> ctx) const;
    void accumulate(std::vector<double>& p, std::span<const uint32_t> context) const;

    ContextModelConfig config_;
    uint32_t alphabet_size_;
    bool frozen_ = false;
    ContextStats order0_;
    std::vector<ContextTable> tables_;  // index o-1 holds order-o contexts
    std::vector<uint32_t> history_;     // last `order` tokens
};

}  // namespace pcdc
