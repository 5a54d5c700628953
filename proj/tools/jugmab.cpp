#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "jugmab/config.hpp"
#include "jugmab/datagen.hpp"
#include "jugmab/dataset_io.hpp"
#include "jugmab/metrics.hpp"
#include "jugmab/simulator.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

/// JUGGLER_MAB_THREADS caps within-day parallelism; 0 means hardware auto.
int apply_thread_cap(int configured) {
    const char* env = std::getenv("JUGGLER_MAB_THREADS");
    if (env == nullptr || *env == '\0') return configured;
    int cap = 0;
    try {
        std::size_t used = 0;
        cap = std::stoi(env, &used);
        if (used != std::string(env).size() || cap < 0) throw std::invalid_argument(env);
    } catch (const std::exception&) {
        throw std::runtime_error(std::string("JUGGLER_MAB_THREADS must be a non-negative "
                                             "integer, got \"") +
                                 env + "\"");
    }
    const unsigned hardware = std::max(1u, std::thread::hardware_concurrency());
    const int resolved_cap = cap == 0 ? static_cast<int>(hardware) : cap;
    const int resolved_cfg = configured == 0 ? static_cast<int>(hardware) : configured;
    return std::min(resolved_cap, resolved_cfg);
}

fs::path prepare_out_dir(const std::string& out) {
    if (out.empty()) throw std::runtime_error("no output directory set (config \"out\" or --out)");
    fs::path dir(out);
    fs::create_directories(dir);
    return dir;
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const std::string& w : warnings) std::cerr << "warning: " << w << '\n';
}

int cmd_generate(const std::string& config_path, std::optional<std::uint64_t> seed,
                 std::string out_file) {
    json j = load_json_file(config_path);
    if (j.contains("out")) {
        if (out_file.empty()) out_file = j.at("out").get<std::string>();
        j.erase("out");
    }
    jugmab::GenConfig config = jugmab::parse_gen_config(j);
    if (seed) config.seed = *seed;
    if (out_file.empty()) throw std::runtime_error("no output file set (config \"out\" or --out)");

    const jugmab::GenResult result = jugmab::generate(config);
    if (auto parent = fs::path(out_file).parent_path(); !parent.empty())
        fs::create_directories(parent);
    jugmab::write_dataset(out_file, result.dataset);
    std::cout << "wrote " << out_file << ": " << result.dataset.records.size() << " searches over "
              << result.dataset.header.days << " days, mean neutral reward "
              << jugmab::format_double(result.mean_neutral_reward);
    if (result.gap_checked)
        std::cout << ", achieved gap " << jugmab::format_double(result.achieved_gap);
    std::cout << '\n';
    return 0;
}

struct RunOutput {
    std::string name;
    jugmab::Summary summary;
};

RunOutput execute_run(const jugmab::Dataset& dataset, const jugmab::SimulationConfig& sim,
                      const std::string& name, const fs::path& out_dir) {
    jugmab::SimulationResult result = jugmab::run(dataset, sim);
    print_warnings(result.validation_warnings);
    jugmab::write_decision_log((out_dir / (name + "_decisions.jsonl")).string(),
                               result.decisions);
    std::ofstream snapshot(out_dir / (name + "_snapshot.json"), std::ios::binary);
    if (!snapshot) throw std::runtime_error("cannot write snapshot for run " + name);
    snapshot << result.final_snapshot.dump(2) << '\n';
    if (!snapshot) throw std::runtime_error("failed while writing snapshot for run " + name);
    return RunOutput{name, jugmab::summarize(result.decisions)};
}

void write_run_csvs(const fs::path& out_dir, const std::vector<RunOutput>& runs) {
    std::vector<std::pair<std::string, jugmab::RunSummary>> summary_rows;
    std::vector<std::pair<std::string, std::vector<jugmab::DailyReport>>> daily_rows;
    for (const RunOutput& run : runs) {
        summary_rows.emplace_back(run.name, run.summary.overall);
        daily_rows.emplace_back(run.name, run.summary.daily);
    }
    jugmab::write_summary_csv((out_dir / "summary.csv").string(), summary_rows);
    jugmab::write_daily_csv((out_dir / "daily.csv").string(), daily_rows);
}

int cmd_simulate(const std::string& config_path, std::optional<std::uint64_t> seed,
                 const std::string& policy_name, const std::string& data_override,
                 const std::string& out_override) {
    jugmab::RunConfig config = jugmab::parse_run_config(load_json_file(config_path));
    if (seed) config.sim.seed = *seed;
    if (!policy_name.empty()) jugmab::apply_policy_name(config.sim.policy, policy_name);
    if (!data_override.empty()) config.data = data_override;
    if (!out_override.empty()) config.out = out_override;
    if (config.data.empty())
        throw std::runtime_error("no dataset path set (config \"data\" or --data)");
    config.sim.threads = apply_thread_cap(config.sim.threads);

    const fs::path out_dir = prepare_out_dir(config.out);
    const jugmab::Dataset dataset = jugmab::read_dataset(config.data);
    const std::string name = jugmab::policy_display_name(config.sim.policy);
    std::vector<RunOutput> runs;
    runs.push_back(execute_run(dataset, config.sim, name, out_dir));
    write_run_csvs(out_dir, runs);
    std::cout << "run " << name << ": avg_reward "
              << jugmab::format_double(runs.front().summary.overall.avg_reward) << ", avg_regret "
              << jugmab::format_double(runs.front().summary.overall.avg_regret)
              << ", best_arm_pct "
              << jugmab::format_double(runs.front().summary.overall.best_arm_pct) << '\n';
    return 0;
}

int cmd_sweep(const std::string& config_path, std::optional<std::uint64_t> seed,
              const std::string& data_override, const std::string& out_override) {
    jugmab::SweepConfig config = jugmab::parse_sweep_config(load_json_file(config_path));
    if (seed) config.sim.seed = *seed;
    if (!data_override.empty()) config.data = data_override;
    if (!out_override.empty()) config.out = out_override;
    if (config.data.empty())
        throw std::runtime_error("no dataset path set (config \"data\" or --data)");
    config.sim.threads = apply_thread_cap(config.sim.threads);

    const fs::path out_dir = prepare_out_dir(config.out);
    const jugmab::Dataset dataset = jugmab::read_dataset(config.data);
    std::vector<RunOutput> runs;
    for (const auto& [name, policy] : config.policies) {
        jugmab::SimulationConfig sim = config.sim;
        sim.policy = policy;
        runs.push_back(execute_run(dataset, sim, name, out_dir));
        std::cout << "run " << name << ": avg_reward "
                  << jugmab::format_double(runs.back().summary.overall.avg_reward) << '\n';
    }
    write_run_csvs(out_dir, runs);
    return 0;
}

int cmd_report(const std::string& config_path, int k_override, const std::string& data_override,
               const std::string& out_override) {
    jugmab::ReportConfig config = jugmab::parse_report_config(load_json_file(config_path));
    if (k_override > 0) config.k = k_override;
    if (!data_override.empty()) config.data = data_override;
    if (!out_override.empty()) config.out = out_override;
    if (config.data.empty())
        throw std::runtime_error("no dataset path set (config \"data\" or --data)");
    if (config.baseline_log.empty())
        throw std::runtime_error("report config needs a baseline log path");
    if (config.runs.empty()) throw std::runtime_error("report config needs at least one run");

    const fs::path out_dir = prepare_out_dir(config.out);
    const jugmab::Dataset dataset = jugmab::read_dataset(config.data);
    const auto baseline_log = jugmab::read_decision_log(config.baseline_log);
    const jugmab::Summary baseline = jugmab::summarize(baseline_log);
    const jugmab::TopKStats baseline_topk =
        jugmab::top_k_stats(baseline_log, dataset, config.arm_space, config.k);

    std::vector<std::string> run_names;
    std::vector<jugmab::DeltaReport> deltas;
    std::map<std::string, std::vector<double>> delta_rows;
    for (const auto& [name, log_path] : config.runs) {
        const auto log = jugmab::read_decision_log(log_path);
        const jugmab::Summary summary = jugmab::summarize(log);
        deltas.push_back(jugmab::compare_to_baseline(summary.overall, baseline.overall));
        const jugmab::TopKStats topk =
            jugmab::top_k_stats(log, dataset, config.arm_space, config.k);
        run_names.push_back(name);
        for (const auto& [attribute, value] : jugmab::top_k_delta(topk, baseline_topk))
            delta_rows[attribute].push_back(value);
    }

    std::ofstream table(out_dir / "comparison.csv", std::ios::binary);
    if (!table) throw std::runtime_error("cannot write comparison.csv");
    table << "run,reward_delta,reward_delta_pct,regret_delta,regret_delta_pct,"
             "best_arm_delta,best_arm_delta_pct\n";
    for (std::size_t i = 0; i < run_names.size(); ++i) {
        const jugmab::DeltaReport& delta = deltas[i];
        table << run_names[i] << ',' << jugmab::format_double(delta.reward_abs) << ','
              << jugmab::format_double(delta.reward_rel_pct) << ','
              << jugmab::format_double(delta.regret_abs) << ','
              << jugmab::format_double(delta.regret_rel_pct) << ','
              << jugmab::format_double(delta.best_arm_abs) << ','
              << jugmab::format_double(delta.best_arm_rel_pct) << '\n';
    }
    if (!table) throw std::runtime_error("failed while writing comparison.csv");
    table.close();

    jugmab::write_top_k_delta_csv((out_dir / "topk_delta.csv").string(), run_names, delta_rows);
    std::cout << "compared " << config.runs.size() << " run(s) against " << config.baseline_name
              << " (k=" << config.k << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Offline bandit refinement of ranking weights: synthetic data generation, "
                 "replay simulation, and reporting"};
    app.require_subcommand(1);

    std::string config_path;
    std::string data_path;
    std::string out_path;
    std::string policy_name;
    std::optional<std::uint64_t> seed;
    int k = 0;

    auto add_config = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file")->required();
        cmd->add_option("--out", out_path, "output location (overrides config)");
    };
    auto add_data = [&](CLI::App* cmd) {
        cmd->add_option("--data", data_path, "dataset JSONL path (overrides config)");
    };
    auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "RNG seed (overrides config)");
    };

    CLI::App* generate = app.add_subcommand("generate", "generate a synthetic dataset");
    add_config(generate);
    add_seed(generate);
    CLI::App* simulate = app.add_subcommand("simulate", "replay one policy over a dataset");
    add_config(simulate);
    add_data(simulate);
    add_seed(simulate);
    simulate->add_option("--policy", policy_name, "policy name (overrides config)");
    CLI::App* sweep = app.add_subcommand("sweep", "replay a list of policies over one dataset");
    add_config(sweep);
    add_data(sweep);
    add_seed(sweep);
    CLI::App* report = app.add_subcommand("report", "compare decision logs against a baseline");
    add_config(report);
    add_data(report);
    report->add_option("--k", k, "top-k depth for attribute stats");

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed()) return cmd_generate(config_path, seed, out_path);
        if (simulate->parsed())
            return cmd_simulate(config_path, seed, policy_name, data_path, out_path);
        if (sweep->parsed()) return cmd_sweep(config_path, seed, data_path, out_path);
        if (report->parsed()) return cmd_report(config_path, k, data_path, out_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
