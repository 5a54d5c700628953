#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iterator>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "jugmab/dataset_io.hpp"
#include "jugmab/domain.hpp"
#include "jugmab/ndcg.hpp"
#include "jugmab/policies.hpp"
#include "jugmab/rng.hpp"
#include "jugmab/scoring.hpp"

namespace jugmab {

enum class UpdateMode { per_observation, daily_mean };

inline const char* update_mode_name(UpdateMode mode) {
    return mode == UpdateMode::per_observation ? "per_observation" : "daily_mean";
}

inline UpdateMode update_mode_from_name(const std::string& name) {
    if (name == "per_observation") return UpdateMode::per_observation;
    if (name == "daily_mean") return UpdateMode::daily_mean;
    throw std::invalid_argument("unknown update_mode: " + name);
}

struct SimulationConfig {
    std::uint64_t seed = 0;
    int horizon_days = 0;  // 0 means the full dataset horizon
    NdcgConfig ndcg;
    ArmSpace arm_space;
    PolicyConfig policy;
    UpdateMode update_mode = UpdateMode::per_observation;
    int threads = 1;  // within-day parallelism; 0 means hardware concurrency

    void validate() const {
        if (horizon_days < 0) throw std::invalid_argument("horizon_days must be >= 1");
        ndcg.validate();
        arm_space.validate();
        policy.validate();
        if (threads < 0) throw std::invalid_argument("threads must be >= 0");
    }
};

/// Full per-search outcome of a replay: the chosen arm's realized reward
/// plus the counterfactual reward of every arm, which makes per-search
/// regret and best-arm membership computable offline.
struct DecisionRecord {
    std::string search_id;
    int day_index = 0;
    int chosen_arm_index = 0;
    double realized_reward = 0.0;
    std::vector<double> counterfactual_rewards;
    double best_reward = 0.0;
    double regret = 0.0;
    bool is_best_arm = false;
    bool was_exploration = false;
};

struct SimulationResult {
    std::vector<DecisionRecord> decisions;
    nlohmann::json final_snapshot;
    std::vector<std::string> validation_warnings;
};

struct BestArmResult {
    std::vector<int> best_arms;  // every arm attaining the maximum
    double best_reward = 0.0;
};

/// Brute-force per-search oracle: evaluate every arm, return the argmax set.
inline BestArmResult oracle_best_arm(const SearchRecord& record, const ArmSpace& arm_space,
                                     const NdcgConfig& ndcg_config) {
    BestArmResult result;
    std::vector<double> rewards(static_cast<std::size_t>(arm_space.size()));
    for (int a = 0; a < arm_space.size(); ++a)
        rewards[static_cast<std::size_t>(a)] = reward_of_arm(record, arm_space.arm(a), ndcg_config);
    result.best_reward = *std::max_element(rewards.begin(), rewards.end());
    for (int a = 0; a < arm_space.size(); ++a)
        if (rewards[static_cast<std::size_t>(a)] == result.best_reward)
            result.best_arms.push_back(a);
    return result;
}

namespace detail {

/// Runs fn(i) for i in [0, n) across up to `threads` workers on contiguous
/// chunks. Output slots are disjoint per index, so results cannot depend on
/// the worker count.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    if (threads == 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = n * w / workers;
        const std::size_t end = n * (w + 1) / workers;
        pool.emplace_back([&, w, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
}

inline std::vector<Observation> build_day_observations(
    UpdateMode mode, std::vector<Observation>&& per_search) {
    if (mode == UpdateMode::per_observation) return std::move(per_search);
    // daily_mean: one observation per (arm, context vector) group carrying the
    // group's mean reward; groups applied in sorted key order for determinism.
    std::map<std::pair<int, std::vector<double>>, std::pair<double, long>> groups;
    for (const Observation& obs : per_search) {
        auto& acc = groups[{obs.arm_index, obs.context_vector}];
        acc.first += obs.reward;
        acc.second += 1;
    }
    std::vector<Observation> merged;
    merged.reserve(groups.size());
    for (const auto& [key, acc] : groups)
        merged.push_back(
            Observation{key.second, key.first, acc.first / static_cast<double>(acc.second)});
    return merged;
}

}  // namespace detail

/// Replays the dataset under one policy, starting from the given policy
/// state at start_day. Within a day the policy is frozen: every search draws
/// from its own (seed, day, sequence) sub-stream, so evaluation order and
/// thread count cannot change any outcome. Observations are applied once at
/// the day boundary.
inline SimulationResult run_from(const Dataset& dataset, const SimulationConfig& config,
                                 std::unique_ptr<Policy> policy, int start_day) {
    config.validate();
    const int horizon = config.horizon_days == 0 ? dataset.day_count() : config.horizon_days;
    if (horizon < 1) throw std::invalid_argument("horizon_days must be >= 1");
    if (horizon > dataset.day_count())
        throw std::invalid_argument("horizon_days exceeds dataset days (" +
                                    std::to_string(dataset.day_count()) + ")");
    SimulationResult result;
    result.validation_warnings = validate_dataset(dataset, config.arm_space);

    const ContextVocab& vocab = dataset.header.vocab;
    const bool contextual = policy->is_contextual();
    const int n_arms = config.arm_space.size();

    for (int day = start_day; day < horizon; ++day) {
        const auto searches = dataset.day(day);
        const std::size_t n = searches.size();
        std::vector<DecisionRecord> day_decisions(n);
        std::vector<Observation> day_observations(n);

        detail::parallel_for(n, config.threads, [&](std::size_t i) {
            const SearchRecord& record = searches[i];
            RngStream rng = RngStream::derived(config.seed, static_cast<std::uint64_t>(day),
                                               static_cast<std::uint64_t>(i));
            std::vector<double> context;
            if (contextual) context = encode_context(record.context, vocab, config.policy.features);

            const PolicyDecision decision = policy->select(context, rng);

            DecisionRecord out;
            out.search_id = record.search_id;
            out.day_index = record.day_index;
            out.chosen_arm_index = decision.arm_index;
            out.was_exploration = decision.was_exploration;
            out.counterfactual_rewards.resize(static_cast<std::size_t>(n_arms));
            for (int a = 0; a < n_arms; ++a)
                out.counterfactual_rewards[static_cast<std::size_t>(a)] =
                    reward_of_arm(record, config.arm_space.arm(a), config.ndcg);
            out.realized_reward =
                out.counterfactual_rewards[static_cast<std::size_t>(decision.arm_index)];
            out.best_reward = *std::max_element(out.counterfactual_rewards.begin(),
                                                out.counterfactual_rewards.end());
            out.regret = out.best_reward - out.realized_reward;
            out.is_best_arm = out.realized_reward == out.best_reward;

            day_observations[i] =
                Observation{std::move(context), decision.arm_index, out.realized_reward};
            day_decisions[i] = std::move(out);
        });

        policy->update_batch(
            detail::build_day_observations(config.update_mode, std::move(day_observations)));
        result.decisions.insert(result.decisions.end(),
                                std::make_move_iterator(day_decisions.begin()),
                                std::make_move_iterator(day_decisions.end()));
    }

    result.final_snapshot = policy->snapshot();
    return result;
}

inline SimulationResult run(const Dataset& dataset, const SimulationConfig& config) {
    return run_from(dataset, config,
                    make_policy(config.policy, config.arm_space, dataset.header.vocab), 0);
}

/// Resume a run from a snapshot taken after day start_day - 1. Because every
/// search's randomness is keyed by (seed, day, sequence), the continuation
/// reproduces exactly what an uninterrupted run would have emitted for the
/// remaining days.
inline SimulationResult resume(const Dataset& dataset, const SimulationConfig& config,
                               const nlohmann::json& snapshot, int start_day) {
    auto policy = make_policy(config.policy, config.arm_space, dataset.header.vocab);
    policy->restore(snapshot);
    return run_from(dataset, config, std::move(policy), start_day);
}

// --- decision log (JSONL) ---

inline nlohmann::json decision_to_json(const DecisionRecord& d) {
    return {{"search_id", d.search_id},
            {"day_index", d.day_index},
            {"chosen_arm_index", d.chosen_arm_index},
            {"realized_reward", d.realized_reward},
            {"counterfactual_rewards", d.counterfactual_rewards},
            {"best_reward", d.best_reward},
            {"regret", d.regret},
            {"is_best_arm", d.is_best_arm},
            {"was_exploration", d.was_exploration}};
}

inline DecisionRecord decision_from_json(const nlohmann::json& j) {
    DecisionRecord d;
    d.search_id = j.at("search_id").get<std::string>();
    d.day_index = j.at("day_index").get<int>();
    d.chosen_arm_index = j.at("chosen_arm_index").get<int>();
    d.realized_reward = j.at("realized_reward").get<double>();
    d.counterfactual_rewards = j.at("counterfactual_rewards").get<std::vector<double>>();
    d.best_reward = j.at("best_reward").get<double>();
    d.regret = j.at("regret").get<double>();
    d.is_best_arm = j.at("is_best_arm").get<bool>();
    d.was_exploration = j.at("was_exploration").get<bool>();
    return d;
}

inline void write_decision_log(const std::string& path,
                               std::span<const DecisionRecord> decisions) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write decision log: " + path);
    for (const DecisionRecord& d : decisions) out << decision_to_json(d).dump() << '\n';
    if (!out) throw std::runtime_error("failed while writing decision log: " + path);
}

inline std::vector<DecisionRecord> read_decision_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open decision log: " + path);
    std::vector<DecisionRecord> decisions;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        try {
            decisions.push_back(decision_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_number) + ": " + e.what());
        }
    }
    return decisions;
}

}  // namespace jugmab
