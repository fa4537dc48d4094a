#include "pcdc/predictor.hpp"

#include <algorithm>
#include <numeric>

namespace pcdc {

Distribution quantize_probabilities(std::span<const double> p) {
    const size_t n = p.size();
    if (n == 0 || n > Distribution::kTotal) throw ConfigError("quantize: alphabet size out of range");

    double sum = 0.0;
    for (double v : p) {
        if (!(v >= 0.0)) throw ConfigError("quantize: negative or NaN probability");
        sum += v;
    }
    if (sum < 1.0 - 1e-4 || sum > 1.0 + 1e-4) throw ConfigError("quantize: probabilities do not sum to 1");

    constexpr uint32_t kTotal = Distribution::kTotal;
    std::vector<uint32_t> freq(n);
    std::vector<double> rem(n);
    uint64_t assigned = 0;
    for (size_t i = 0; i < n; ++i) {
        double ideal = (p[i] / sum) * kTotal;
        double base = std::floor(ideal);
        freq[i] = static_cast<uint32_t>(base);
        rem[i] = ideal - base;
        if (freq[i] == 0) {
            freq[i] = 1;
            rem[i] = 0.0;
        }
        assigned += freq[i];
    }

    std::vector<uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    if (assigned < kTotal) {
        std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
            if (rem[a] != rem[b]) return rem[a] > rem[b];
            return a < b;
        });
        uint64_t missing = kTotal - assigned;
        for (size_t i = 0; missing > 0; i = (i + 1) % n) {
            freq[order[i]] += 1;
            --missing;
        }
    } else if (assigned > kTotal) {
        std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
            if (freq[a] != freq[b]) return freq[a] > freq[b];
            return a < b;
        });
        uint64_t excess = assigned - kTotal;
        for (size_t i = 0; excess > 0; i = (i + 1) % n) {
            if (freq[order[i]] > 1) {
                freq[order[i]] -= 1;
                --excess;
            }
        }
    }

    std::vector<uint32_t> cum(n + 1, 0);
    for (size_t i = 0; i < n; ++i) cum[i + 1] = cum[i] + freq[i];
    return Distribution(std::move(cum));
}

void ContextModelConfig::validate() const {
    if (order > 12) throw ConfigError("context model: order must be in 0..12");
    if (capacity_log2 < 4 || capacity_log2 > 28)
        throw ConfigError("context model: capacity_log2 must be in 4..28");
}

void OrderKModel::ContextStats::bump(uint32_t symbol) {
    auto it = std::lower_bound(counts.begin(), counts.end(), symbol,
                               [](const auto& e, uint32_t s) { return e.first < s; });
    if (it != counts.end() && it->first == symbol) {
        it->second += 1;
    } else {
        counts.insert(it, {symbol, 1});
    }
    total += 1;
}

const uint32_t* OrderKModel::ContextStats::find(uint32_t symbol) const {
    auto it = std::lower_bound(counts.begin(), counts.end(), symbol,
                               [](const auto& e, uint32_t s) { return e.first < s; });
    if (it != counts.end() && it->first == symbol) return &it->second;
    return nullptr;
}

OrderKModel::ContextTable::ContextTable(uint32_t capacity_log2) {
    size_t cap = size_t{1} << capacity_log2;
    keys.assign(cap, 0);
    slot_to_stats.assign(cap, 0);
    mask = cap - 1;
    max_entries = cap - cap / 8;  // keep probes short
}

OrderKModel::ContextStats* OrderKModel::ContextTable::find(uint64_t key) {
    for (size_t i = key & mask;; i = (i + 1) & mask) {
        if (keys[i] == key) return &stats[slot_to_stats[i]];
        if (keys[i] == 0) return nullptr;
    }
}

const OrderKModel::ContextStats* OrderKModel::ContextTable::find(uint64_t key) const {
    for (size_t i = key & mask;; i = (i + 1) & mask) {
        if (keys[i] == key) return &stats[slot_to_stats[i]];
        if (keys[i] == 0) return nullptr;
    }
}

OrderKModel::ContextStats* OrderKModel::ContextTable::find_or_insert(uint64_t key) {
    for (size_t i = key & mask;; i = (i + 1) & mask) {
        if (keys[i] == key) return &stats[slot_to_stats[i]];
        if (keys[i] == 0) {
            if (stats.size() >= max_entries) return nullptr;  // table full, stop learning
            keys[i] = key;
            slot_to_stats[i] = static_cast<uint32_t>(stats.size());
            stats.emplace_back();
            stats_keys.push_back(key);
            return &stats.back();
        }
    }
}

OrderKModel::OrderKModel(ContextModelConfig config, uint32_t alphabet_size)
    : config_(config), alphabet_size_(alphabet_size) {
    config_.validate();
    if (alphabet_size_ == 0 || alphabet_size_ > Distribution::kTotal)
        throw ConfigError("context model: alphabet size out of range");
    tables_.reserve(config_.order);
    for (uint32_t o = 0; o < config_.order; ++o) tables_.emplace_back(config_.capacity_log2);
}

uint64_t OrderKModel::context_fingerprint(uint32_t order, std::span<const uint32_t> ctx) const {
    uint64_t h = fnv1a(&order, sizeof(order));
    h = fnv1a(ctx.data(), ctx.size() * sizeof(uint32_t), h);
    return h ? h : 0x9e3779b97f4a7c15ULL;  // 0 marks empty slots
}

void OrderKModel::accumulate(std::vector<double>& p, std::span<const uint32_t> context) const {
    double weight = 1.0;
    uint32_t max_order = std::min<uint32_t>(config_.order, static_cast<uint32_t>(context.size()));
    for (uint32_t o = max_order; o >= 1; --o) {
        auto ctx = context.subspan(context.size() - o, o);
        const ContextStats* st = tables_[o - 1].find(context_fingerprint(o, ctx));
        if (st == nullptr || st->total == 0) continue;
        double denom = static_cast<double>(st->total + st->counts.size());
        for (const auto& [sym, c] : st->counts) p[sym] += weight * (static_cast<double>(c) / denom);
        weight *= static_cast<double>(st->counts.size()) / denom;
    }
    if (order0_.total > 0) {
        double denom = static_cast<double>(order0_.total + order0_.counts.size());
        for (const auto& [sym, c] : order0_.counts) p[sym] += weight * (static_cast<double>(c) / denom);
        weight *= static_cast<double>(order0_.counts.size()) / denom;
    }
    double leftover = weight / alphabet_size_;
    for (double& v : p) v += leftover;
}

Distribution OrderKModel::next_distribution() {
    std::vector<double> p(alphabet_size_, 0.0);
    accumulate(p, history_);
    return quantize_probabilities(p);
}

Distribution OrderKModel::predict_for(std::span<const uint32_t> context) const {
    std::vector<double> p(alphabet_size_, 0.0);
    accumulate(p, context);
    return quantize_probabilities(p);
}

void OrderKModel::update(uint32_t token) {
    if (token >= alphabet_size_) throw ConfigError("context model: token out of range");
    if (!frozen_) {
        uint32_t max_order = std::min<uint32_t>(config_.order, static_cast<uint32_t>(history_.size()));
        for (uint32_t o = 1; o <= max_order; ++o) {
            auto ctx = std::span<const uint32_t>(history_).subspan(history_.size() - o, o);
            ContextStats* st = tables_[o - 1].find_or_insert(context_fingerprint(o, ctx));
            if (st != nullptr) st->bump(token);
        }
        order0_.bump(token);
    }
    history_.push_back(token);
    if (history_.size() > config_.order) history_.erase(history_.begin());
}

void OrderKModel::train(std::span<const uint32_t> tokens) {
    for (uint32_t t : tokens) update(t);
    history_.clear();
}

uint64_t OrderKModel::model_size_bytes() const {
    if (!frozen_) return 0;  // adaptive models travel with the stream
    // Serialized layout: per context 8-byte key + 1-byte order, per entry
    // 4-byte symbol + 4-byte count.
    uint64_t bytes = 16;  // header
    auto table_bytes = [](const ContextStats& st) {
        return 9 + 8 * static_cast<uint64_t>(st.counts.size());
    };
    bytes += table_bytes(order0_);
    for (const auto& t : tables_) {
        for (const auto& st : t.stats) bytes += table_bytes(st);
    }
    return bytes;
}

std::unique_ptr<OrderKModel> OrderKModel::spawn_decoder_twin() const {
    auto twin = std::make_unique<OrderKModel>(config_, alphabet_size_);
    if (frozen_) {
        twin->order0_ = order0_;
        twin->tables_ = tables_;
        twin->frozen_ = true;
    }
    return twin;
}

std::vector<OrderKModel::CountRow> OrderKModel::export_counts() const {
    std::vector<CountRow> rows;
    for (const auto& [sym, c] : order0_.counts) rows.push_back({0, 0, sym, c});
    for (uint32_t o = 1; o <= config_.order; ++o) {
        const ContextTable& t = tables_[o - 1];
        std::vector<uint32_t> idx(t.stats.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](uint32_t a, uint32_t b) {
            return t.stats_keys[a] < t.stats_keys[b];
        });
        for (uint32_t i : idx) {
            for (const auto& [sym, c] : t.stats[i].counts) {
                rows.push_back({o, t.stats_keys[i], sym, c});
            }
        }
    }
    return rows;
}

void OrderKModel::import_counts(std::span<const CountRow> rows) {
    order0_ = ContextStats{};
    for (auto& t : tables_) {
        std::fill(t.keys.begin(), t.keys.end(), 0);
        t.slot_to_stats.assign(t.keys.size(), 0);
        t.stats.clear();
        t.stats_keys.clear();
    }
    for (const auto& row : rows) {
        if (row.count == 0) continue;
        ContextStats* st = nullptr;
        if (row.order == 0) {
            st = &order0_;
        } else {
            if (row.order > config_.order) throw ConfigError("import_counts: order exceeds model order");
            st = tables_[row.order - 1].find_or_insert(row.context_key);
            if (st == nullptr) throw ConfigError("import_counts: context table overflow");
        }
        auto it = std::lower_bound(st->counts.begin(), st->counts.end(), row.symbol,
                                   [](const auto& e, uint32_t s) { return e.first < s; });
        if (it != st->counts.end() && it->first == row.symbol) {
            st->total -= it->second;
            it->second = row.count;
        } else {
            st->counts.insert(it, {row.symbol, row.count});
        }
        st->total += row.count;
    }
}

}  // namespace pcdc
