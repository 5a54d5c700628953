#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "jugmab/domain.hpp"
#include "jugmab/ndcg.hpp"

namespace jugmab {

/// A ranking of one record's items. ordered_item_indices holds original item
/// positions, best first; sort_scores stays aligned with the original order.
struct ScoredRanking {
    std::vector<int> ordered_item_indices;
    std::vector<double> sort_scores;
};

/// Additive weight combination: the corrective arm shifts the predicted
/// weights before they multiply the item scores.
inline double sort_score(const Item& item, const JugglerPrediction& juggler, const Arm& arm) {
    return (juggler.w_utility + arm.w_utility_mab) * item.utility_score +
           (juggler.w_comp + arm.w_comp_mab) * item.compensation_score;
}

/// Rank a record's items under one arm: descending sort score, ties broken
/// by ascending original index so replay is deterministic.
inline ScoredRanking rank(const SearchRecord& record, const Arm& arm) {
    ScoredRanking ranking;
    const std::size_t n = record.items.size();
    ranking.sort_scores.reserve(n);
    for (const Item& item : record.items)
        ranking.sort_scores.push_back(sort_score(item, record.juggler, arm));
    ranking.ordered_item_indices.resize(n);
    std::iota(ranking.ordered_item_indices.begin(), ranking.ordered_item_indices.end(), 0);
    std::sort(ranking.ordered_item_indices.begin(), ranking.ordered_item_indices.end(),
              [&scores = ranking.sort_scores](int a, int b) {
                  if (scores[a] != scores[b]) return scores[a] > scores[b];
                  return a < b;
              });
    return ranking;
}

/// Relevance labels read in the order a ranking would display them.
inline std::vector<int> labels_in_ranked_order(const SearchRecord& record,
                                               const ScoredRanking& ranking) {
    std::vector<int> labels;
    labels.reserve(ranking.ordered_item_indices.size());
    for (int idx : ranking.ordered_item_indices)
        labels.push_back(record.items[idx].relevance_label);
    return labels;
}

/// Reward of applying one arm to one search: NDCG of the re-ranked labels.
inline Reward reward_of_arm(const SearchRecord& record, const Arm& arm,
                            const NdcgConfig& ndcg_config) {
    return ndcg(labels_in_ranked_order(record, rank(record, arm)), ndcg_config);
}

}  // namespace jugmab
