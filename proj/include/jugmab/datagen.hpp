#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "jugmab/dataset_io.hpp"
#include "jugmab/domain.hpp"
#include "jugmab/ndcg.hpp"
#include "jugmab/rng.hpp"
#include "jugmab/scoring.hpp"

namespace jugmab {

struct VocabSizes {
    int brand = 2;
    int device = 2;
    int geo = 2;

    int of(ContextFeature f) const {
        switch (f) {
            case ContextFeature::brand: return brand;
            case ContextFeature::device: return device;
            case ContextFeature::geo: return geo;
        }
        throw std::invalid_argument("unknown context feature");
    }
};

struct GenConfig {
    std::uint64_t seed = 1;
    int days = 1;
    int searches_per_day = 100;
    int items_per_search = 8;
    VocabSizes vocab_sizes;
    ContextFeature designated_feature = ContextFeature::brand;
    // context value of the designated feature -> arm index that must be
    // optimal for searches carrying that value; unmapped values get the
    // neutral arm
    std::map<std::string, int> context_effect;
    double reward_gap = 0.1;
    double label_noise = 0.0;
    double click_rate = 0.3;
    std::pair<double, double> juggler_utility_range{0.8, 1.2};
    std::pair<double, double> juggler_comp_range{0.4, 0.6};
    bool with_attributes = false;
    ArmSpace arm_space;
    NdcgConfig ndcg;

    void validate() const {
        if (days < 1) throw std::invalid_argument("days must be >= 1");
        if (searches_per_day < 1) throw std::invalid_argument("searches_per_day must be >= 1");
        if (items_per_search < 2) throw std::invalid_argument("items_per_search must be >= 2");
        if (vocab_sizes.brand < 1 || vocab_sizes.device < 1 || vocab_sizes.geo < 1)
            throw std::invalid_argument("vocab sizes must be >= 1");
        if (!(reward_gap > 0.0 && reward_gap <= 1.0))
            throw std::invalid_argument("reward_gap must be in (0, 1]");
        if (!(label_noise >= 0.0 && label_noise < 1.0))
            throw std::invalid_argument("label_noise must be in [0, 1)");
        if (!(click_rate >= 0.0 && click_rate <= 1.0))
            throw std::invalid_argument("click_rate must be in [0, 1]");
        for (const auto& range : {juggler_utility_range, juggler_comp_range})
            if (!(range.first > 0.0) || range.first > range.second)
                throw std::invalid_argument("Juggler weight ranges must be positive and ordered");
        arm_space.validate();
        ndcg.validate();
    }
};

struct GenResult {
    Dataset dataset;
    double mean_neutral_reward = 0.0;  // over the emitted file, noise included
    double achieved_gap = 0.0;         // mean(best - neutral) absent noise
    bool gap_checked = false;          // false when every context maps to the neutral arm
};

namespace gen_detail {

inline std::string vocab_value(ContextFeature f, int index) {
    return std::string(feature_name(f)) + "_" + std::to_string(index);
}

inline ContextVocab build_vocab(const VocabSizes& sizes) {
    auto values_for = [](ContextFeature f, int size) {
        std::vector<std::string> values;
        values.reserve(static_cast<std::size_t>(size));
        for (int i = 0; i < size; ++i) values.push_back(vocab_value(f, i));
        return values;
    };
    ContextVocab vocab;
    vocab.brand = values_for(ContextFeature::brand, sizes.brand);
    vocab.device = values_for(ContextFeature::device, sizes.device);
    vocab.geo = values_for(ContextFeature::geo, sizes.geo);
    return vocab;
}

/// A candidate neutral-arm ranking expressed as a permutation of ideal
/// (descending-label) ranks, together with the NDCG it would score.
struct WrongCandidate {
    std::vector<int> order;  // position p holds the ideal rank shown there
    double ndcg_value = 1.0;
};

/// Identity, every adjacent transposition, every demote-top-to-position-j,
/// and the full reversal of the ideal order. Spans NDCG losses from 0 up to
/// the reversal loss in fine steps, which lets the schedule track any
/// realizable mean gap closely.
inline std::vector<WrongCandidate> wrong_candidates(const std::vector<int>& ideal_labels,
                                                    const NdcgConfig& ndcg_config) {
    const int n = static_cast<int>(ideal_labels.size());
    std::vector<WrongCandidate> candidates;
    auto add = [&](std::vector<int> order) {
        std::vector<int> labels(static_cast<std::size_t>(n));
        for (int p = 0; p < n; ++p)
            labels[static_cast<std::size_t>(p)] =
                ideal_labels[static_cast<std::size_t>(order[static_cast<std::size_t>(p)])];
        candidates.push_back({std::move(order), ndcg(labels, ndcg_config)});
    };
    std::vector<int> identity(static_cast<std::size_t>(n));
    std::iota(identity.begin(), identity.end(), 0);
    add(identity);
    for (int i = 0; i + 1 < n; ++i) {
        if (ideal_labels[static_cast<std::size_t>(i)] == ideal_labels[static_cast<std::size_t>(i + 1)])
            continue;
        std::vector<int> order = identity;
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i + 1)]);
        add(std::move(order));
    }
    for (int j = 2; j < n; ++j) {
        std::vector<int> order;
        order.reserve(static_cast<std::size_t>(n));
        for (int r = 1; r <= j; ++r) order.push_back(r);
        order.push_back(0);
        for (int r = j + 1; r < n; ++r) order.push_back(r);
        add(std::move(order));
    }
    std::vector<int> reversed(identity.rbegin(), identity.rend());
    add(std::move(reversed));
    return candidates;
}

/// Greedy schedule keeping the running sum of per-search NDCG losses on the
/// line loss_sum = reward_gap * searches_seen.
class GapController {
  public:
    explicit GapController(double reward_gap) : reward_gap_(reward_gap) {}

    const WrongCandidate& pick(const std::vector<WrongCandidate>& candidates) {
        const double target = reward_gap_ * static_cast<double>(searches_ + 1);
        const WrongCandidate* best = &candidates.front();
        double best_error = std::abs(loss_sum_ + (1.0 - best->ndcg_value) - target);
        for (const WrongCandidate& c : candidates) {
            const double error = std::abs(loss_sum_ + (1.0 - c.ndcg_value) - target);
            if (error < best_error) {
                best = &c;
                best_error = error;
            }
        }
        return *best;
    }

    void record(double realized_loss) {
        loss_sum_ += realized_loss;
        ++searches_;
        losses_scheduled_ = true;
    }

    void record_neutral_search() { ++searches_; }

    double achieved_gap() const {
        return searches_ == 0 ? 0.0 : loss_sum_ / static_cast<double>(searches_);
    }
    bool any_scheduled() const { return losses_scheduled_; }

  private:
    double reward_gap_;
    double loss_sum_ = 0.0;
    long searches_ = 0;
    bool losses_scheduled_ = false;
};

inline double uniform_in(RngStream& rng, double lo, double hi) {
    return lo + (hi - lo) * rng.uniform();
}

/// Attribute distributions correlated with the relevance label: prices and
/// margins fall with relevance, ratings rise with it.
inline std::map<std::string, double> draw_attributes(RngStream& rng, int label) {
    const double l = static_cast<double>(label);
    std::map<std::string, double> attrs;
    attrs["daily_price"] = 120.0 - 10.0 * l + uniform_in(rng, -20.0, 20.0);
    attrs["guest_rating"] = std::clamp(3.0 + 0.2 * l + uniform_in(rng, -0.8, 0.8), 1.0, 5.0);
    attrs["star_rating"] = std::clamp(3.0 + 0.15 * l + uniform_in(rng, -1.0, 1.0), 1.0, 5.0);
    attrs["margin_pct"] = 0.15 - 0.012 * l + uniform_in(rng, -0.03, 0.03);
    attrs["margin_abs"] = 18.0 - 1.5 * l + uniform_in(rng, -4.0, 4.0);
    return attrs;
}

}  // namespace gen_detail

/// Builds a synthetic search log with an exactly planted reward structure:
/// for every search, the arm designated by the search's context ranks the
/// items in descending label order (NDCG 1), while the neutral arm realizes
/// a scheduled permutation whose NDCG losses average reward_gap over the
/// file. Scores are obtained by solving the 2x2 linear system that makes
/// both target rankings hold simultaneously under the combined-weight
/// scoring rule.
inline GenResult generate(const GenConfig& config) {
    config.validate();
    const ContextVocab vocab = gen_detail::build_vocab(config.vocab_sizes);
    const int neutral = config.arm_space.neutral_index();
    const int n = config.items_per_search;

    for (const auto& [value, arm_index] : config.context_effect) {
        if (vocab.index_of(config.designated_feature, value) < 0)
            throw std::invalid_argument("context_effect key is not a vocabulary value: " + value);
        if (arm_index < 0 || arm_index >= config.arm_space.size())
            throw std::invalid_argument("context_effect arm index out of range: " +
                                        std::to_string(arm_index));
    }

    GenResult result;
    result.dataset.header.vocab = vocab;
    result.dataset.header.days = config.days;
    result.dataset.records.reserve(
        static_cast<std::size_t>(config.days) * static_cast<std::size_t>(config.searches_per_day));

    gen_detail::GapController controller(config.reward_gap);
    double neutral_reward_sum = 0.0;

    for (int day = 0; day < config.days; ++day) {
        for (int seq = 0; seq < config.searches_per_day; ++seq) {
            RngStream rng = RngStream::derived(config.seed, static_cast<std::uint64_t>(day),
                                               static_cast<std::uint64_t>(seq));
            SearchRecord record;
            record.search_id = "d" + std::to_string(day) + "-" + std::to_string(seq);
            record.day_index = day;

            for (ContextFeature f : kContextFeatures) {
                const int size = config.vocab_sizes.of(f);
                const int pick = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(size)));
                context_value(record.context, f) = gen_detail::vocab_value(f, pick);
            }
            const std::string& designated_value =
                context_value(record.context, config.designated_feature);
            const auto effect = config.context_effect.find(designated_value);
            const int designated =
                effect == config.context_effect.end() ? neutral : effect->second;

            std::vector<int> ideal_labels(static_cast<std::size_t>(n), 0);
            ideal_labels[0] = 5;
            for (int i = 1; i < n; ++i)
                if (rng.uniform() < config.click_rate) ideal_labels[static_cast<std::size_t>(i)] = 1;
            std::sort(ideal_labels.begin(), ideal_labels.end(), std::greater<>());

            const Arm arm = config.arm_space.arm(designated);
            double wu = 0.0;
            double wc = 0.0;
            double det = 0.0;
            for (int attempt = 0;; ++attempt) {
                wu = gen_detail::uniform_in(rng, config.juggler_utility_range.first,
                                            config.juggler_utility_range.second);
                wc = gen_detail::uniform_in(rng, config.juggler_comp_range.first,
                                            config.juggler_comp_range.second);
                if (designated == neutral) break;
                det = arm.w_utility_mab * wc - arm.w_comp_mab * wu;
                if (std::abs(det) >= 0.05) break;
                if (attempt >= 1000)
                    throw std::runtime_error(
                        "search " + record.search_id +
                        ": designated-arm correction is collinear with every Juggler draw");
            }
            record.juggler = JugglerPrediction{wu, wc};
            record.items.resize(static_cast<std::size_t>(n));

            if (designated == neutral) {
                // Single constraint per item: neutral score descends with
                // label rank. Compensation is free, utility absorbs it.
                const double a0 = gen_detail::uniform_in(rng, 0.8, 1.2);
                const double b0 = gen_detail::uniform_in(rng, -1.0, 1.0);
                for (int p = 0; p < n; ++p) {
                    const double s0 = a0 * static_cast<double>(n - p) + b0 +
                                      gen_detail::uniform_in(rng, -0.2, 0.2) * a0;
                    const double c = gen_detail::uniform_in(rng, -0.5, 0.5);
                    Item& item = record.items[static_cast<std::size_t>(p)];
                    item.item_id = "i" + std::to_string(p);
                    item.utility_score = (s0 - wc * c) / wu;
                    item.compensation_score = c;
                    item.relevance_label = ideal_labels[static_cast<std::size_t>(p)];
                }
                controller.record_neutral_search();
            } else {
                const auto candidates = gen_detail::wrong_candidates(ideal_labels, config.ndcg);
                const gen_detail::WrongCandidate& target = controller.pick(candidates);

                const double a1 = gen_detail::uniform_in(rng, 0.8, 1.2);
                const double b1 = gen_detail::uniform_in(rng, -1.0, 1.0);
                const double a0 = gen_detail::uniform_in(rng, 0.8, 1.2);
                const double b0 = gen_detail::uniform_in(rng, -1.0, 1.0);
                for (int p = 0; p < n; ++p) {
                    // Position p in the record displays the item the neutral
                    // arm ranks there; its ideal (designated) rank is
                    // target.order[p].
                    const int r = target.order[static_cast<std::size_t>(p)];
                    const double s_star = a1 * static_cast<double>(n - r) + b1 +
                                          gen_detail::uniform_in(rng, -0.2, 0.2) * a1;
                    const double s_neut = a0 * static_cast<double>(n - p) + b0 +
                                          gen_detail::uniform_in(rng, -0.2, 0.2) * a0;
                    Item& item = record.items[static_cast<std::size_t>(p)];
                    item.item_id = "i" + std::to_string(p);
                    item.utility_score =
                        (wc * s_star - (wc + arm.w_comp_mab) * s_neut) / det;
                    item.compensation_score =
                        ((wu + arm.w_utility_mab) * s_neut - wu * s_star) / det;
                    item.relevance_label = ideal_labels[static_cast<std::size_t>(r)];
                }

                const double designated_reward =
                    reward_of_arm(record, arm, config.ndcg);
                if (designated_reward != 1.0)
                    throw std::logic_error("search " + record.search_id +
                                           ": designated arm did not realize a perfect ranking");
                const double neutral_reward =
                    reward_of_arm(record, config.arm_space.arm(neutral), config.ndcg);
                controller.record(1.0 - neutral_reward);
            }

            if (config.label_noise > 0.0 && rng.uniform() < config.label_noise) {
                for (int i = n - 1; i > 0; --i) {
                    const int j =
                        static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(i + 1)));
                    std::swap(record.items[static_cast<std::size_t>(i)].relevance_label,
                              record.items[static_cast<std::size_t>(j)].relevance_label);
                }
            }

            if (config.with_attributes)
                for (Item& item : record.items)
                    item.attributes = gen_detail::draw_attributes(rng, item.relevance_label);

            neutral_reward_sum +=
                reward_of_arm(record, config.arm_space.arm(neutral), config.ndcg);
            result.dataset.records.push_back(std::move(record));
        }
    }

    result.dataset.build_day_index();
    result.mean_neutral_reward =
        neutral_reward_sum / static_cast<double>(result.dataset.records.size());
    result.achieved_gap = controller.achieved_gap();
    result.gap_checked = controller.any_scheduled();
    if (result.gap_checked && std::abs(result.achieved_gap - config.reward_gap) > 0.01)
        throw std::runtime_error("unrealizable reward_gap " + std::to_string(config.reward_gap) +
                                 " (achieved " + std::to_string(result.achieved_gap) + ")");
    return result;
}

}  // namespace jugmab
