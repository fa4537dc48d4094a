#include "pcdc/huffman.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

namespace pcdc {

CanonicalCode CanonicalCode::from_counts(std::span<const uint64_t> counts) {
    struct Node {
        uint64_t weight;
        uint32_t seq;  // tie-break: leaves in symbol order, then merge order
        int32_t left;
        int32_t right;
        int32_t symbol;
    };

    std::vector<Node> nodes;
    nodes.reserve(counts.size() * 2);
    for (uint32_t s = 0; s < counts.size(); ++s) {
        if (counts[s] > 0) {
            nodes.push_back({counts[s], static_cast<uint32_t>(nodes.size()), -1, -1,
                             static_cast<int32_t>(s)});
        }
    }
    if (nodes.empty()) throw ConfigError("huffman: no symbols with nonzero count");

    std::vector<uint8_t> lengths(counts.size(), 0);
    if (nodes.size() == 1) {
        // Degenerate alphabet still needs one bit per symbol to stay
        // prefix-decodable.
        lengths[nodes[0].symbol] = 1;
        return from_lengths(std::move(lengths));
    }

    auto cmp = [&nodes](uint32_t a, uint32_t b) {
        if (nodes[a].weight != nodes[b].weight) return nodes[a].weight > nodes[b].weight;
        return nodes[a].seq > nodes[b].seq;
    };
    std::priority_queue<uint32_t, std::vector<uint32_t>, decltype(cmp)> heap(cmp);
    for (uint32_t i = 0; i < nodes.size(); ++i) heap.push(i);

    while (heap.size() > 1) {
        uint32_t a = heap.top();
        heap.pop();
        uint32_t b = heap.top();
        heap.pop();
        nodes.push_back({nodes[a].weight + nodes[b].weight, static_cast<uint32_t>(nodes.size()),
                         static_cast<int32_t>(a), static_cast<int32_t>(b), -1});
        heap.push(static_cast<uint32_t>(nodes.size() - 1));
    }

    // Depth-first walk assigns code lengths.
    std::vector<std::pair<uint32_t, uint8_t>> stack{{heap.top(), 0}};
    while (!stack.empty()) {
        auto [idx, depth] = stack.back();
        stack.pop_back();
        const Node& n = nodes[idx];
        if (n.symbol >= 0) {
            if (depth > kMaxCodeLen) throw ConfigError("huffman: code length overflow");
            lengths[n.symbol] = depth;
        } else {
            stack.push_back({static_cast<uint32_t>(n.left), static_cast<uint8_t>(depth + 1)});
            stack.push_back({static_cast<uint32_t>(n.right), static_cast<uint8_t>(depth + 1)});
        }
    }
    return from_lengths(std::move(lengths));
}

CanonicalCode CanonicalCode::from_lengths(std::vector<uint8_t> lengths) {
    CanonicalCode cc;
    cc.lengths_ = std::move(lengths);
    cc.build_tables();
    return cc;
}

void CanonicalCode::build_tables() {
    sorted_symbols_.clear();
    for (uint32_t s = 0; s < lengths_.size(); ++s) {
        if (lengths_[s] > 0) {
            if (lengths_[s] > kMaxCodeLen) throw ConfigError("huffman: bad length table");
            sorted_symbols_.push_back(s);
        }
    }
    if (sorted_symbols_.empty()) throw ConfigError("huffman: empty length table");
    std::sort(sorted_symbols_.begin(), sorted_symbols_.end(), [this](uint32_t a, uint32_t b) {
        if (lengths_[a] != lengths_[b]) return lengths_[a] < lengths_[b];
        return a < b;
    });

    min_len_ = lengths_[sorted_symbols_.front()];
    max_len_ = lengths_[sorted_symbols_.back()];
    first_code_.assign(max_len_ + 1, 0);
    first_index_.assign(max_len_ + 1, 0);
    count_at_len_.assign(max_len_ + 1, 0);
    for (uint32_t s : sorted_symbols_) count_at_len_[lengths_[s]]++;

    uint64_t code = 0;
    uint32_t index = 0;
    for (uint32_t len = min_len_; len <= max_len_; ++len) {
        first_code_[len] = code;
        first_index_[len] = index;
        code += count_at_len_[len];
        index += count_at_len_[len];
        if (len < max_len_) code <<= 1;
    }
    if (code > (1ULL << max_len_)) throw ConfigError("huffman: lengths violate Kraft");

    code_of_.assign(lengths_.size(), 0);
    for (uint32_t i = 0; i < sorted_symbols_.size(); ++i) {
        uint32_t s = sorted_symbols_[i];
        code_of_[s] = first_code_[lengths_[s]] + (i - first_index_[lengths_[s]]);
    }
}

void CanonicalCode::encode(BitWriter& out, uint32_t symbol) const {
    out.put_bits(code_of_[symbol], lengths_[symbol]);
}

uint32_t CanonicalCode::decode(BitReader& in) const {
    uint64_t value = in.get_bits(min_len_);
    for (uint32_t len = min_len_; len <= max_len_; ++len) {
        uint64_t offset = value - first_code_[len];
        if (value >= first_code_[len] && offset < count_at_len_[len]) {
            return sorted_symbols_[first_index_[len] + offset];
        }
        if (len < max_len_) value = (value << 1) | in.get_bit();
    }
    throw CorruptStreamError("huffman: unmatched codeword");
}

double CanonicalCode::expected_length(std::span<const uint64_t> counts) const {
    uint64_t total = 0;
    double weighted = 0.0;
    for (uint32_t s = 0; s < counts.size() && s < lengths_.size(); ++s) {
        total += counts[s];
        weighted += static_cast<double>(counts[s]) * lengths_[s];
    }
    return total ? weighted / static_cast<double>(total) : 0.0;
}

}  // namespace pcdc
