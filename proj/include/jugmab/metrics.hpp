#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "jugmab/dataset_io.hpp"
#include "jugmab/domain.hpp"
#include "jugmab/scoring.hpp"
#include "jugmab/simulator.hpp"

namespace jugmab {

struct DailyReport {
    int day_index = 0;
    long search_count = 0;
    double mean_reward = 0.0;
    double mean_regret = 0.0;
    double best_arm_rate = 0.0;
    std::vector<long> arm_pulls;
};

struct RunSummary {
    long search_count = 0;
    double avg_reward = 0.0;
    double avg_regret = 0.0;
    double best_arm_pct = 0.0;  // fraction of searches where the chosen arm was optimal
};

struct Summary {
    RunSummary overall;
    std::vector<DailyReport> daily;
};

/// Aggregates a decision log into per-day reports plus an overall summary.
/// The log must be grouped by non-decreasing day_index (the order the
/// simulator emits).
inline Summary summarize(std::span<const DecisionRecord> decisions) {
    if (decisions.empty()) throw std::invalid_argument("cannot summarize an empty decision log");
    const int arm_count = static_cast<int>(decisions.front().counterfactual_rewards.size());

    Summary summary;
    double total_reward = 0.0;
    double total_regret = 0.0;
    long total_best = 0;

    DailyReport day;
    day.day_index = decisions.front().day_index;
    day.arm_pulls.assign(static_cast<std::size_t>(arm_count), 0);
    double day_reward = 0.0;
    double day_regret = 0.0;
    long day_best = 0;

    auto flush_day = [&] {
        day.mean_reward = day_reward / static_cast<double>(day.search_count);
        day.mean_regret = day_regret / static_cast<double>(day.search_count);
        day.best_arm_rate = static_cast<double>(day_best) / static_cast<double>(day.search_count);
        summary.daily.push_back(std::move(day));
    };

    for (const DecisionRecord& d : decisions) {
        if (static_cast<int>(d.counterfactual_rewards.size()) != arm_count)
            throw std::invalid_argument("decision log mixes different arm counts");
        if (d.day_index < day.day_index)
            throw std::invalid_argument("decision log is not grouped by day");
        if (d.day_index != day.day_index) {
            flush_day();
            day = DailyReport{};
            day.day_index = d.day_index;
            day.arm_pulls.assign(static_cast<std::size_t>(arm_count), 0);
            day_reward = day_regret = 0.0;
            day_best = 0;
        }
        if (d.chosen_arm_index < 0 || d.chosen_arm_index >= arm_count)
            throw std::out_of_range("decision log chosen_arm_index out of range");
        day.search_count += 1;
        day.arm_pulls[static_cast<std::size_t>(d.chosen_arm_index)] += 1;
        day_reward += d.realized_reward;
        day_regret += d.regret;
        day_best += d.is_best_arm ? 1 : 0;
        summary.overall.search_count += 1;
        total_reward += d.realized_reward;
        total_regret += d.regret;
        total_best += d.is_best_arm ? 1 : 0;
    }
    flush_day();

    const double n = static_cast<double>(summary.overall.search_count);
    summary.overall.avg_reward = total_reward / n;
    summary.overall.avg_regret = total_regret / n;
    summary.overall.best_arm_pct = static_cast<double>(total_best) / n;
    return summary;
}

struct DeltaReport {
    double reward_abs = 0.0;
    double regret_abs = 0.0;
    double best_arm_abs = 0.0;
    double reward_rel_pct = 0.0;
    double regret_rel_pct = 0.0;
    double best_arm_rel_pct = 0.0;
};

namespace detail {

inline double relative_pct(double value, double base) {
    if (base == 0.0)
        return value == 0.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
    return (value - base) / std::abs(base) * 100.0;
}

}  // namespace detail

/// Absolute and relative deltas of a run against a baseline run over the
/// same searches. Comparing runs over different search sets is a usage
/// error, detected via the search counts.
inline DeltaReport compare_to_baseline(const RunSummary& run, const RunSummary& baseline) {
    if (run.search_count != baseline.search_count)
        throw std::invalid_argument("cannot compare runs with different search counts (" +
                                    std::to_string(run.search_count) + " vs " +
                                    std::to_string(baseline.search_count) + ")");
    DeltaReport delta;
    delta.reward_abs = run.avg_reward - baseline.avg_reward;
    delta.regret_abs = run.avg_regret - baseline.avg_regret;
    delta.best_arm_abs = run.best_arm_pct - baseline.best_arm_pct;
    delta.reward_rel_pct = detail::relative_pct(run.avg_reward, baseline.avg_reward);
    delta.regret_rel_pct = detail::relative_pct(run.avg_regret, baseline.avg_regret);
    delta.best_arm_rel_pct = detail::relative_pct(run.best_arm_pct, baseline.best_arm_pct);
    return delta;
}

struct TopKStats {
    int k = 0;
    // attribute -> mean over searches of the per-search mean across the
    // top-k items that carry the attribute
    std::map<std::string, double> attribute_means;
};

/// Re-ranks every search under the arm the log chose for it and averages
/// item attributes over the top-k positions. An attribute's per-search mean
/// uses only the top-k items carrying it; searches with no carrier are left
/// out of that attribute's denominator.
inline TopKStats top_k_stats(std::span<const DecisionRecord> decisions, const Dataset& dataset,
                             const ArmSpace& arm_space, int k) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (decisions.size() != dataset.records.size())
        throw std::invalid_argument("decision log and dataset sizes differ (" +
                                    std::to_string(decisions.size()) + " vs " +
                                    std::to_string(dataset.records.size()) + ")");
    std::map<std::string, std::pair<double, long>> sums;  // attribute -> (sum of search means, searches)
    for (std::size_t i = 0; i < decisions.size(); ++i) {
        const DecisionRecord& d = decisions[i];
        const SearchRecord& record = dataset.records[i];
        if (d.search_id != record.search_id)
            throw std::invalid_argument("decision log does not match dataset at search " +
                                        record.search_id);
        const ScoredRanking ranking = rank(record, arm_space.arm(d.chosen_arm_index));
        const std::size_t depth =
            std::min<std::size_t>(static_cast<std::size_t>(k), record.items.size());
        std::map<std::string, std::pair<double, long>> search_sums;
        for (std::size_t pos = 0; pos < depth; ++pos) {
            const Item& item =
                record.items[static_cast<std::size_t>(ranking.ordered_item_indices[pos])];
            for (const auto& [name, value] : item.attributes) {
                auto& acc = search_sums[name];
                acc.first += value;
                acc.second += 1;
            }
        }
        for (const auto& [name, acc] : search_sums) {
            auto& total = sums[name];
            total.first += acc.first / static_cast<double>(acc.second);
            total.second += 1;
        }
    }
    if (sums.empty())
        throw std::runtime_error("no item attributes present in any top-k list");
    TopKStats stats;
    stats.k = k;
    for (const auto& [name, acc] : sums)
        stats.attribute_means[name] = acc.first / static_cast<double>(acc.second);
    return stats;
}

/// Per-attribute difference of top-k means against a baseline computed over
/// the same dataset.
inline std::map<std::string, double> top_k_delta(const TopKStats& run, const TopKStats& baseline) {
    if (run.k != baseline.k)
        throw std::invalid_argument("cannot compare top-k stats with different k");
    std::map<std::string, double> delta;
    for (const auto& [name, mean] : run.attribute_means) {
        auto it = baseline.attribute_means.find(name);
        if (it == baseline.attribute_means.end())
            throw std::invalid_argument("attribute sets differ: " + name);
        delta[name] = mean - it->second;
    }
    if (baseline.attribute_means.size() != run.attribute_means.size())
        throw std::invalid_argument("attribute sets differ");
    return delta;
}

// --- CSV output ---

/// Shortest decimal form that round-trips the exact double.
inline std::string format_double(double value) {
    char buffer[32];
    auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
    if (ec != std::errc{}) throw std::runtime_error("double formatting failed");
    return std::string(buffer, end);
}

namespace detail {

inline std::ofstream open_csv(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    return out;
}

}  // namespace detail

inline void write_summary_csv(const std::string& path,
                              const std::vector<std::pair<std::string, RunSummary>>& rows) {
    std::ofstream out = detail::open_csv(path);
    out << "policy,avg_reward,avg_regret,best_arm_pct\n";
    for (const auto& [name, summary] : rows)
        out << name << ',' << format_double(summary.avg_reward) << ','
            << format_double(summary.avg_regret) << ',' << format_double(summary.best_arm_pct)
            << '\n';
    if (!out) throw std::runtime_error("failed while writing file: " + path);
}

inline void write_daily_csv(
    const std::string& path,
    const std::vector<std::pair<std::string, std::vector<DailyReport>>>& runs) {
    if (runs.empty() || runs.front().second.empty())
        throw std::invalid_argument("daily CSV needs at least one run with one day");
    const std::size_t arm_count = runs.front().second.front().arm_pulls.size();
    std::ofstream out = detail::open_csv(path);
    out << "run,day,mean_reward,mean_regret,best_arm_rate";
    for (std::size_t a = 0; a < arm_count; ++a) out << ",pulls_" << a;
    out << '\n';
    for (const auto& [name, days] : runs)
        for (const DailyReport& day : days) {
            if (day.arm_pulls.size() != arm_count)
                throw std::invalid_argument("daily CSV rows mix different arm counts");
            out << name << ',' << day.day_index << ',' << format_double(day.mean_reward) << ','
                << format_double(day.mean_regret) << ',' << format_double(day.best_arm_rate);
            for (long pulls : day.arm_pulls) out << ',' << pulls;
            out << '\n';
        }
    if (!out) throw std::runtime_error("failed while writing file: " + path);
}

/// One row per attribute, one column per run; cells are run-minus-baseline
/// deltas of the top-k attribute means.
inline void write_top_k_delta_csv(
    const std::string& path, const std::vector<std::string>& run_names,
    const std::map<std::string, std::vector<double>>& rows) {
    std::ofstream out = detail::open_csv(path);
    out << "attribute";
    for (const std::string& name : run_names) out << ',' << name;
    out << '\n';
    for (const auto& [attribute, deltas] : rows) {
        if (deltas.size() != run_names.size())
            throw std::invalid_argument("top-k delta row width does not match run names");
        out << attribute;
        for (double delta : deltas) out << ',' << format_double(delta);
        out << '\n';
    }
    if (!out) throw std::runtime_error("failed while writing file: " + path);
}

}  // namespace jugmab
