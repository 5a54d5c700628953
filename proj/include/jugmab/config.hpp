#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "jugmab/datagen.hpp"
#include "jugmab/domain.hpp"
#include "jugmab/ndcg.hpp"
#include "jugmab/policies.hpp"
#include "jugmab/simulator.hpp"

namespace jugmab {

namespace cfg_detail {

/// Rejects unknown keys so config typos fail loudly instead of silently
/// falling back to defaults.
inline void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                       const std::string& where) {
    if (!j.is_object()) throw std::invalid_argument(where + ": expected a JSON object");
    for (const auto& [key, value] : j.items())
        if (!allowed.contains(key))
            throw std::invalid_argument(where + ": unknown field \"" + key + "\"");
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

}  // namespace cfg_detail

inline NdcgConfig parse_ndcg_config(const nlohmann::json& j) {
    cfg_detail::check_keys(j, {"gain", "cutoff"}, "ndcg");
    NdcgConfig config;
    if (auto it = j.find("gain"); it != j.end()) {
        const auto name = it->get<std::string>();
        if (name == "exponential") config.gain = GainType::exponential;
        else if (name == "linear") config.gain = GainType::linear;
        else throw std::invalid_argument("ndcg.gain must be \"exponential\" or \"linear\"");
    }
    if (auto it = j.find("cutoff"); it != j.end() && !it->is_null())
        config.cutoff = it->get<int>();
    config.validate();
    return config;
}

inline ArmSpace parse_arm_space(const nlohmann::json& j) {
    cfg_detail::check_keys(j, {"utility_values", "comp_values"}, "arm_space");
    ArmSpace space;
    cfg_detail::read(j, "utility_values", space.utility_values);
    cfg_detail::read(j, "comp_values", space.comp_values);
    space.validate();
    return space;
}

inline FeatureSet parse_features(const nlohmann::json& j) {
    if (!j.is_array()) throw std::invalid_argument("features must be an array of feature names");
    FeatureSet set;
    for (const auto& entry : j) {
        const ContextFeature f = feature_from_name(entry.get<std::string>());
        if (set.contains(f))
            throw std::invalid_argument(std::string("duplicate feature: ") + feature_name(f));
        switch (f) {
            case ContextFeature::brand: set.brand = true; break;
            case ContextFeature::device: set.device = true; break;
            case ContextFeature::geo: set.geo = true; break;
        }
    }
    return set;
}

inline PolicyConfig parse_policy_config(const nlohmann::json& j) {
    cfg_detail::check_keys(j,
                           {"algorithm", "epsilon", "mu0", "tau0_sq", "lambda", "sigma_obs_sq",
                            "optimistic_init", "features", "name"},
                           "policy");
    PolicyConfig config;
    if (auto it = j.find("algorithm"); it != j.end())
        config.algorithm = algorithm_from_name(it->get<std::string>());
    cfg_detail::read(j, "epsilon", config.epsilon);
    cfg_detail::read(j, "mu0", config.mu0);
    cfg_detail::read(j, "tau0_sq", config.tau0_sq);
    cfg_detail::read(j, "lambda", config.lambda);
    cfg_detail::read(j, "sigma_obs_sq", config.sigma_obs_sq);
    cfg_detail::read(j, "optimistic_init", config.optimistic_init);
    if (auto it = j.find("features"); it != j.end()) config.features = parse_features(*it);
    config.validate();
    return config;
}

/// Row label used in CSV outputs: the algorithm name, refined with epsilon
/// for epsilon-greedy and with the enabled feature list for RLS.
inline std::string policy_display_name(const PolicyConfig& config) {
    switch (config.algorithm) {
        case Algorithm::baseline: return "baseline";
        case Algorithm::gaussian_thompson: return "gaussian_thompson";
        case Algorithm::epsilon_greedy: {
            std::string eps = std::to_string(config.epsilon);
            eps.erase(eps.find_last_not_of('0') + 1);
            if (!eps.empty() && eps.back() == '.') eps.pop_back();
            return "epsilon_greedy_" + eps;
        }
        case Algorithm::rls_thompson: {
            std::string name = "rls";
            for (ContextFeature f : kContextFeatures)
                if (config.features.contains(f)) name += std::string("_") + feature_name(f);
            return name;
        }
    }
    throw std::logic_error("unreachable");
}

/// Applies a --policy override. Accepts the four algorithm names plus the
/// refined display forms: epsilon_greedy_<eps> and rls_<feature>[_<feature>...].
inline void apply_policy_name(PolicyConfig& config, const std::string& name) {
    if (name == "baseline" || name == "gaussian_thompson" || name == "epsilon_greedy" ||
        name == "rls_thompson") {
        config.algorithm = algorithm_from_name(name);
        return;
    }
    if (name.starts_with("epsilon_greedy_")) {
        config.algorithm = Algorithm::epsilon_greedy;
        const std::string eps = name.substr(std::string("epsilon_greedy_").size());
        try {
            std::size_t used = 0;
            config.epsilon = std::stod(eps, &used);
            if (used != eps.size()) throw std::invalid_argument(eps);
        } catch (const std::exception&) {
            throw std::invalid_argument("cannot parse epsilon from policy name: " + name);
        }
        return;
    }
    if (name.starts_with("rls_")) {
        config.algorithm = Algorithm::rls_thompson;
        FeatureSet set;
        std::string rest = name.substr(4);
        std::size_t pos = 0;
        while (pos <= rest.size()) {
            const std::size_t end = std::min(rest.find('_', pos), rest.size());
            const ContextFeature f = feature_from_name(rest.substr(pos, end - pos));
            switch (f) {
                case ContextFeature::brand: set.brand = true; break;
                case ContextFeature::device: set.device = true; break;
                case ContextFeature::geo: set.geo = true; break;
            }
            pos = end + 1;
        }
        config.features = set;
        return;
    }
    throw std::invalid_argument("unknown policy name: " + name);
}

inline SimulationConfig parse_simulation_fields(const nlohmann::json& j) {
    SimulationConfig config;
    cfg_detail::read(j, "seed", config.seed);
    cfg_detail::read(j, "horizon_days", config.horizon_days);
    cfg_detail::read(j, "threads", config.threads);
    if (auto it = j.find("update_mode"); it != j.end())
        config.update_mode = update_mode_from_name(it->get<std::string>());
    if (auto it = j.find("ndcg"); it != j.end()) config.ndcg = parse_ndcg_config(*it);
    if (auto it = j.find("arm_space"); it != j.end()) config.arm_space = parse_arm_space(*it);
    if (auto it = j.find("policy"); it != j.end()) config.policy = parse_policy_config(*it);
    return config;
}

/// One simulate invocation: simulation settings plus input/output locations.
struct RunConfig {
    SimulationConfig sim;
    std::string data;
    std::string out;
};

inline RunConfig parse_run_config(const nlohmann::json& j) {
    cfg_detail::check_keys(j,
                           {"seed", "horizon_days", "threads", "update_mode", "ndcg", "arm_space",
                            "policy", "data", "out"},
                           "run config");
    RunConfig config;
    config.sim = parse_simulation_fields(j);
    cfg_detail::read(j, "data", config.data);
    cfg_detail::read(j, "out", config.out);
    return config;
}

/// A sweep shares one dataset and the simulation settings across a list of
/// policy blocks, producing one labeled row per policy.
struct SweepConfig {
    SimulationConfig sim;
    std::vector<std::pair<std::string, PolicyConfig>> policies;
    std::string data;
    std::string out;
};

inline SweepConfig parse_sweep_config(const nlohmann::json& j) {
    cfg_detail::check_keys(j,
                           {"seed", "horizon_days", "threads", "update_mode", "ndcg", "arm_space",
                            "policies", "data", "out"},
                           "sweep config");
    SweepConfig config;
    config.sim = parse_simulation_fields(j);
    cfg_detail::read(j, "data", config.data);
    cfg_detail::read(j, "out", config.out);
    const auto it = j.find("policies");
    if (it == j.end() || !it->is_array() || it->empty())
        throw std::invalid_argument("sweep config: \"policies\" must be a non-empty array");
    for (const auto& block : *it) {
        PolicyConfig policy = parse_policy_config(block);
        std::string name = policy_display_name(policy);
        cfg_detail::read(block, "name", name);
        config.policies.emplace_back(std::move(name), std::move(policy));
    }
    return config;
}

/// Report inputs: the shared dataset, a baseline decision log, and the runs
/// to compare against it.
struct ReportConfig {
    std::string data;
    ArmSpace arm_space;
    int k = 10;
    std::string baseline_name = "baseline";
    std::string baseline_log;
    std::vector<std::pair<std::string, std::string>> runs;  // name, log path
    std::string out;
};

inline ReportConfig parse_report_config(const nlohmann::json& j) {
    cfg_detail::check_keys(j, {"data", "arm_space", "k", "baseline", "runs", "out"},
                           "report config");
    ReportConfig config;
    cfg_detail::read(j, "data", config.data);
    cfg_detail::read(j, "out", config.out);
    cfg_detail::read(j, "k", config.k);
    if (auto it = j.find("arm_space"); it != j.end()) config.arm_space = parse_arm_space(*it);
    if (auto it = j.find("baseline"); it != j.end()) {
        cfg_detail::check_keys(*it, {"name", "log"}, "report baseline");
        cfg_detail::read(*it, "name", config.baseline_name);
        cfg_detail::read(*it, "log", config.baseline_log);
    }
    if (auto it = j.find("runs"); it != j.end()) {
        if (!it->is_array()) throw std::invalid_argument("report config: \"runs\" must be an array");
        for (const auto& block : *it) {
            cfg_detail::check_keys(block, {"name", "log"}, "report run");
            std::string name;
            std::string log;
            cfg_detail::read(block, "name", name);
            cfg_detail::read(block, "log", log);
            if (name.empty() || log.empty())
                throw std::invalid_argument("report config: every run needs a name and a log");
            config.runs.emplace_back(std::move(name), std::move(log));
        }
    }
    return config;
}

inline GenConfig parse_gen_config(const nlohmann::json& j) {
    cfg_detail::check_keys(
        j,
        {"seed", "days", "searches_per_day", "items_per_search", "vocab_sizes",
         "designated_feature", "context_effect", "reward_gap", "label_noise", "click_rate",
         "juggler_utility_range", "juggler_comp_range", "with_attributes", "arm_space", "ndcg"},
        "gen config");
    GenConfig config;
    cfg_detail::read(j, "seed", config.seed);
    cfg_detail::read(j, "days", config.days);
    cfg_detail::read(j, "searches_per_day", config.searches_per_day);
    cfg_detail::read(j, "items_per_search", config.items_per_search);
    if (auto it = j.find("vocab_sizes"); it != j.end()) {
        cfg_detail::check_keys(*it, {"brand", "device", "geo"}, "vocab_sizes");
        cfg_detail::read(*it, "brand", config.vocab_sizes.brand);
        cfg_detail::read(*it, "device", config.vocab_sizes.device);
        cfg_detail::read(*it, "geo", config.vocab_sizes.geo);
    }
    if (auto it = j.find("designated_feature"); it != j.end())
        config.designated_feature = feature_from_name(it->get<std::string>());
    if (auto it = j.find("context_effect"); it != j.end())
        config.context_effect = it->get<std::map<std::string, int>>();
    cfg_detail::read(j, "reward_gap", config.reward_gap);
    cfg_detail::read(j, "label_noise", config.label_noise);
    cfg_detail::read(j, "click_rate", config.click_rate);
    if (auto it = j.find("juggler_utility_range"); it != j.end())
        config.juggler_utility_range = it->get<std::pair<double, double>>();
    if (auto it = j.find("juggler_comp_range"); it != j.end())
        config.juggler_comp_range = it->get<std::pair<double, double>>();
    cfg_detail::read(j, "with_attributes", config.with_attributes);
    if (auto it = j.find("arm_space"); it != j.end()) config.arm_space = parse_arm_space(*it);
    if (auto it = j.find("ndcg"); it != j.end()) config.ndcg = parse_ndcg_config(*it);
    config.validate();
    return config;
}

}  // namespace jugmab
