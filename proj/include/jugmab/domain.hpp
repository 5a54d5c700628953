#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace jugmab {

/// One candidate from a logged search. Scores are the upstream ranking
/// model's utility (user relevance) and compensation (platform revenue)
/// outputs; relevance_label is a non-negative interaction grade (0 = none).
/// Attributes carry optional per-item statistics (price, ratings, margins)
/// used only for top-k reporting.
struct Item {
    std::string item_id;
    double utility_score = 0.0;
    double compensation_score = 0.0;
    int relevance_label = 0;
    std::map<std::string, double> attributes;
};

struct Context {
    std::string brand;
    std::string device;
    std::string geo;
};

/// Per-search baseline weights predicted by the upstream meta-model.
struct JugglerPrediction {
    double w_utility = 0.0;
    double w_comp = 0.0;
};

struct SearchRecord {
    std::string search_id;
    int day_index = 0;
    Context context;
    JugglerPrediction juggler;
    std::vector<Item> items;
};

/// One corrective-weight pair from the arm grid.
struct Arm {
    double w_utility_mab = 0.0;
    double w_comp_mab = 0.0;
    int arm_index = 0;
};

/// The finite grid of corrective weights. arm_index is row-major over
/// (utility values x compensation values); both value lists must be strictly
/// increasing and contain 0.0 so a neutral (no-op) arm always exists.
struct ArmSpace {
    std::vector<double> utility_values{-0.3, 0.0, 0.3};
    std::vector<double> comp_values{-0.2, 0.0, 0.2};

    int size() const {
        return static_cast<int>(utility_values.size() * comp_values.size());
    }

    Arm arm(int arm_index) const {
        if (arm_index < 0 || arm_index >= size())
            throw std::out_of_range("arm_index out of range: " + std::to_string(arm_index));
        const int n_comp = static_cast<int>(comp_values.size());
        return Arm{utility_values[arm_index / n_comp], comp_values[arm_index % n_comp],
                   arm_index};
    }

    int neutral_index() const {
        const auto u = std::find(utility_values.begin(), utility_values.end(), 0.0);
        const auto c = std::find(comp_values.begin(), comp_values.end(), 0.0);
        return static_cast<int>((u - utility_values.begin()) * comp_values.size() +
                                (c - comp_values.begin()));
    }

    void validate() const {
        for (const auto* values : {&utility_values, &comp_values}) {
            if (values->empty()) throw std::invalid_argument("arm space: empty value list");
            if (std::adjacent_find(values->begin(), values->end(), [](double a, double b) {
                    return a >= b;
                }) != values->end())
                throw std::invalid_argument("arm space: values must be strictly increasing");
            if (std::find(values->begin(), values->end(), 0.0) == values->end())
                throw std::invalid_argument("arm space: values must contain 0.0");
        }
    }
};

/// Reward is the NDCG of the realized ranking, a real in [0, 1].
using Reward = double;

enum class ContextFeature { brand, device, geo };

inline constexpr ContextFeature kContextFeatures[] = {
    ContextFeature::brand, ContextFeature::device, ContextFeature::geo};

inline const char* feature_name(ContextFeature f) {
    switch (f) {
        case ContextFeature::brand: return "brand";
        case ContextFeature::device: return "device";
        case ContextFeature::geo: return "geo";
    }
    throw std::logic_error("unreachable");
}

inline ContextFeature feature_from_name(const std::string& name) {
    for (ContextFeature f : kContextFeatures)
        if (name == feature_name(f)) return f;
    throw std::invalid_argument("unknown context feature: " + name);
}

/// Subset of {brand, device, geo}, kept in that fixed order regardless of
/// how the configuration listed them.
struct FeatureSet {
    bool brand = false;
    bool device = false;
    bool geo = false;

    bool contains(ContextFeature f) const {
        switch (f) {
            case ContextFeature::brand: return brand;
            case ContextFeature::device: return device;
            case ContextFeature::geo: return geo;
        }
        return false;
    }

    bool empty() const { return !brand && !device && !geo; }

    static FeatureSet of(std::initializer_list<ContextFeature> features) {
        FeatureSet set;
        for (ContextFeature f : features) {
            if (f == ContextFeature::brand) set.brand = true;
            if (f == ContextFeature::device) set.device = true;
            if (f == ContextFeature::geo) set.geo = true;
        }
        return set;
    }
};

/// Context vocabularies declared in the dataset header. Declared order fixes
/// one-hot block layout for the whole horizon.
struct ContextVocab {
    std::vector<std::string> brand;
    std::vector<std::string> device;
    std::vector<std::string> geo;

    const std::vector<std::string>& values(ContextFeature f) const {
        switch (f) {
            case ContextFeature::brand: return brand;
            case ContextFeature::device: return device;
            case ContextFeature::geo: return geo;
        }
        throw std::logic_error("unreachable");
    }

    int index_of(ContextFeature f, const std::string& value) const {
        const auto& vocab = values(f);
        const auto it = std::find(vocab.begin(), vocab.end(), value);
        if (it == vocab.end()) return -1;
        return static_cast<int>(it - vocab.begin());
    }
};

inline const std::string& context_value(const Context& context, ContextFeature f) {
    switch (f) {
        case ContextFeature::brand: return context.brand;
        case ContextFeature::device: return context.device;
        case ContextFeature::geo: return context.geo;
    }
    throw std::logic_error("unreachable");
}

inline std::string& context_value(Context& context, ContextFeature f) {
    switch (f) {
        case ContextFeature::brand: return context.brand;
        case ContextFeature::device: return context.device;
        case ContextFeature::geo: return context.geo;
    }
    throw std::logic_error("unreachable");
}

/// Dimension of encode_context output: intercept + one one-hot block per
/// enabled feature.
inline int feature_dim(const ContextVocab& vocab, const FeatureSet& enabled) {
    int dim = 1;
    for (ContextFeature f : kContextFeatures)
        if (enabled.contains(f)) dim += static_cast<int>(vocab.values(f).size());
    return dim;
}

/// Encode a context as [1.0 intercept | one-hot blocks] with blocks in the
/// fixed feature order and block-internal order following the declared
/// vocabulary.
inline std::vector<double> encode_context(const Context& context, const ContextVocab& vocab,
                                          const FeatureSet& enabled) {
    std::vector<double> x;
    x.reserve(feature_dim(vocab, enabled));
    x.push_back(1.0);
    for (ContextFeature f : kContextFeatures) {
        if (!enabled.contains(f)) continue;
        const int hot = vocab.index_of(f, context_value(context, f));
        if (hot < 0)
            throw std::invalid_argument(std::string("context value not in vocabulary: ") +
                                        feature_name(f) + "=" + context_value(context, f));
        const std::size_t offset = x.size();
        x.resize(offset + vocab.values(f).size(), 0.0);
        x[offset + hot] = 1.0;
    }
    return x;
}

/// Validate a record against the type invariants and the declared
/// vocabularies. Throws on hard errors; returns non-fatal warnings, one per
/// arm whose correction drives a combined weight to exactly zero (legal for
/// the mechanism, but outside the regime the corrective grid was chosen for).
inline std::vector<std::string> validate_record(const SearchRecord& record,
                                                const ArmSpace& arm_space,
                                                const ContextVocab& vocab) {
    const std::string where = "search " + record.search_id + ": ";
    if (record.items.empty()) throw std::invalid_argument(where + "empty item list");
    if (record.day_index < 0) throw std::invalid_argument(where + "negative day_index");
    if (!std::isfinite(record.juggler.w_utility) || !std::isfinite(record.juggler.w_comp))
        throw std::invalid_argument(where + "non-finite juggler weight");

    std::unordered_set<std::string> seen_ids;
    for (const Item& item : record.items) {
        if (!seen_ids.insert(item.item_id).second)
            throw std::invalid_argument(where + "duplicate item_id " + item.item_id);
        if (!std::isfinite(item.utility_score) || !std::isfinite(item.compensation_score))
            throw std::invalid_argument(where + "non-finite score for item " + item.item_id);
        if (item.relevance_label < 0)
            throw std::invalid_argument(where + "negative relevance_label for item " +
                                        item.item_id);
        for (const auto& [name, value] : item.attributes)
            if (!std::isfinite(value))
                throw std::invalid_argument(where + "non-finite attribute " + name +
                                            " for item " + item.item_id);
    }

    for (ContextFeature f : kContextFeatures) {
        if (vocab.index_of(f, context_value(record.context, f)) < 0)
            throw std::invalid_argument(where + "context value not in vocabulary: " +
                                        std::string(feature_name(f)) + "=" +
                                        context_value(record.context, f));
    }

    std::vector<std::string> warnings;
    for (int a = 0; a < arm_space.size(); ++a) {
        const Arm arm = arm_space.arm(a);
        const bool zero_utility = record.juggler.w_utility + arm.w_utility_mab == 0.0;
        const bool zero_comp = record.juggler.w_comp + arm.w_comp_mab == 0.0;
        if (zero_utility || zero_comp) {
            warnings.push_back(where + "combined " +
                               (zero_utility ? "utility" : "compensation") +
                               " weight is zero under arm " + std::to_string(a));
        }
    }
    return warnings;
}

}  // namespace jugmab
