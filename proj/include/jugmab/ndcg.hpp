#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace jugmab {

enum class GainType { exponential, linear };

/// NDCG configuration. The reward for a search is the NDCG of its ranked
/// relevance labels; by default the full list is scored with exponential
/// gains (2^rel - 1), the usual learning-to-rank convention.
struct NdcgConfig {
    std::optional<int> cutoff;  // NDCG@k; empty means full list
    GainType gain = GainType::exponential;

    void validate() const {
        if (cutoff && *cutoff < 1) throw std::invalid_argument("ndcg cutoff must be >= 1");
    }
};

inline double label_gain(int label, GainType gain) {
    return gain == GainType::exponential ? std::exp2(static_cast<double>(label)) - 1.0
                                         : static_cast<double>(label);
}

/// DCG of labels read in rank order: sum of gain(rel_i) / log2(i + 1) over
/// 1-based positions i up to the cutoff.
inline double dcg(std::span<const int> labels_in_rank_order, const NdcgConfig& config) {
    if (labels_in_rank_order.empty()) throw std::invalid_argument("dcg: empty label list");
    std::size_t n = labels_in_rank_order.size();
    if (config.cutoff) n = std::min(n, static_cast<std::size_t>(*config.cutoff));
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum += label_gain(labels_in_rank_order[i], config.gain) /
               std::log2(static_cast<double>(i) + 2.0);
    }
    return sum;
}

/// NDCG in [0, 1]. All-zero labels have zero ideal DCG and score 0 by
/// convention; that convention is visible in reports, not hidden here.
inline double ndcg(std::span<const int> labels_in_rank_order, const NdcgConfig& config) {
    const double raw = dcg(labels_in_rank_order, config);
    std::vector<int> ideal(labels_in_rank_order.begin(), labels_in_rank_order.end());
    std::sort(ideal.begin(), ideal.end(), std::greater<int>());
    const double ideal_dcg = dcg(ideal, config);
    if (ideal_dcg == 0.0) return 0.0;
    return raw / ideal_dcg;
}

}  // namespace jugmab
