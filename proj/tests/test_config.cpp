#include <catch_amalgamated.hpp>

#include <json.hpp>

#include "jugmab/config.hpp"

using namespace jugmab;
using nlohmann::json;

TEST_CASE("ndcg block parses gain and cutoff and rejects typos") {
    CHECK(parse_ndcg_config(json::object()).gain == GainType::exponential);
    CHECK_FALSE(parse_ndcg_config(json::object()).cutoff.has_value());

    const NdcgConfig parsed = parse_ndcg_config({{"gain", "linear"}, {"cutoff", 10}});
    CHECK(parsed.gain == GainType::linear);
    CHECK(parsed.cutoff == 10);

    CHECK_FALSE(parse_ndcg_config({{"cutoff", nullptr}}).cutoff.has_value());
    CHECK_THROWS_WITH(parse_ndcg_config({{"gain", "log"}}),
                      Catch::Matchers::ContainsSubstring("exponential"));
    CHECK_THROWS_WITH(parse_ndcg_config({{"cutof", 10}}),
                      Catch::Matchers::ContainsSubstring("unknown field \"cutof\""));
    CHECK_THROWS_AS(parse_ndcg_config({{"cutoff", 0}}), std::invalid_argument);
}

TEST_CASE("arm_space block parses value grids and validates them") {
    const ArmSpace space = parse_arm_space(
        {{"utility_values", {-0.5, 0.0, 0.5}}, {"comp_values", {-0.1, 0.0, 0.1, 0.2}}});
    CHECK(space.size() == 12);
    CHECK(space.arm(space.neutral_index()).w_utility_mab == 0.0);

    CHECK_THROWS_AS(parse_arm_space({{"utility_values", {0.5, 0.0}}}), std::invalid_argument);
    CHECK_THROWS_WITH(parse_arm_space({{"utility", {0.0}}}),
                      Catch::Matchers::ContainsSubstring("unknown field"));
}

TEST_CASE("feature lists parse in any order and reject duplicates") {
    const FeatureSet set = parse_features(json::array({"geo", "brand"}));
    CHECK(set.brand);
    CHECK_FALSE(set.device);
    CHECK(set.geo);

    CHECK_THROWS_WITH(parse_features(json::array({"brand", "brand"})),
                      Catch::Matchers::ContainsSubstring("duplicate feature: brand"));
    CHECK_THROWS_AS(parse_features(json::array({"country"})), std::invalid_argument);
    CHECK_THROWS_WITH(parse_features(json("brand")),
                      Catch::Matchers::ContainsSubstring("must be an array"));
}

TEST_CASE("policy block parses every knob") {
    const PolicyConfig config = parse_policy_config({{"algorithm", "rls_thompson"},
                                                     {"epsilon", 0.2},
                                                     {"mu0", 0.4},
                                                     {"tau0_sq", 2.0},
                                                     {"lambda", 0.5},
                                                     {"sigma_obs_sq", 0.1},
                                                     {"optimistic_init", 0.9},
                                                     {"features", {"brand", "geo"}}});
    CHECK(config.algorithm == Algorithm::rls_thompson);
    CHECK(config.epsilon == 0.2);
    CHECK(config.mu0 == 0.4);
    CHECK(config.tau0_sq == 2.0);
    CHECK(config.lambda == 0.5);
    CHECK(config.sigma_obs_sq == 0.1);
    CHECK(config.optimistic_init == 0.9);
    CHECK(config.features.geo);

    CHECK_THROWS_WITH(parse_policy_config({{"algorithm", "baseline"}, {"eps", 0.1}}),
                      Catch::Matchers::ContainsSubstring("unknown field \"eps\""));
    // validation runs at parse time
    CHECK_THROWS_AS(parse_policy_config({{"algorithm", "rls_thompson"}}),
                    std::invalid_argument);
}

TEST_CASE("display names label policies by what distinguishes them") {
    PolicyConfig config;
    CHECK(policy_display_name(config) == "baseline");

    config.algorithm = Algorithm::gaussian_thompson;
    CHECK(policy_display_name(config) == "gaussian_thompson");

    config.algorithm = Algorithm::epsilon_greedy;
    config.epsilon = 0.1;
    CHECK(policy_display_name(config) == "epsilon_greedy_0.1");
    config.epsilon = 0.3;
    CHECK(policy_display_name(config) == "epsilon_greedy_0.3");
    config.epsilon = 0.25;
    CHECK(policy_display_name(config) == "epsilon_greedy_0.25");
    config.epsilon = 0.0;
    CHECK(policy_display_name(config) == "epsilon_greedy_0");

    config.algorithm = Algorithm::rls_thompson;
    config.features = FeatureSet::of({ContextFeature::geo, ContextFeature::brand});
    CHECK(policy_display_name(config) == "rls_brand_geo");  // fixed feature order
    config.features = FeatureSet::of(
        {ContextFeature::brand, ContextFeature::device, ContextFeature::geo});
    CHECK(policy_display_name(config) == "rls_brand_device_geo");
}

TEST_CASE("policy name overrides round-trip through display names") {
    PolicyConfig config;
    apply_policy_name(config, "epsilon_greedy_0.25");
    CHECK(config.algorithm == Algorithm::epsilon_greedy);
    CHECK(config.epsilon == 0.25);
    CHECK(policy_display_name(config) == "epsilon_greedy_0.25");

    apply_policy_name(config, "rls_geo_brand");
    CHECK(config.algorithm == Algorithm::rls_thompson);
    CHECK(config.features.brand);
    CHECK_FALSE(config.features.device);
    CHECK(config.features.geo);
    CHECK(policy_display_name(config) == "rls_brand_geo");

    apply_policy_name(config, "baseline");
    CHECK(config.algorithm == Algorithm::baseline);
    apply_policy_name(config, "gaussian_thompson");
    CHECK(config.algorithm == Algorithm::gaussian_thompson);
    // plain algorithm name keeps the configured epsilon / features
    apply_policy_name(config, "epsilon_greedy");
    CHECK(config.epsilon == 0.25);

    CHECK_THROWS_WITH(apply_policy_name(config, "epsilon_greedy_lots"),
                      Catch::Matchers::ContainsSubstring("cannot parse epsilon"));
    CHECK_THROWS_AS(apply_policy_name(config, "rls_country"), std::invalid_argument);
    CHECK_THROWS_WITH(apply_policy_name(config, "ucb"),
                      Catch::Matchers::ContainsSubstring("unknown policy name: ucb"));
}

TEST_CASE("run config parses simulation fields and io paths") {
    const RunConfig config = parse_run_config({{"seed", 42},
                                               {"horizon_days", 10},
                                               {"threads", 2},
                                               {"update_mode", "daily_mean"},
                                               {"ndcg", {{"gain", "linear"}}},
                                               {"policy", {{"algorithm", "gaussian_thompson"}}},
                                               {"data", "searches.jsonl"},
                                               {"out", "results"}});
    CHECK(config.sim.seed == 42);
    CHECK(config.sim.horizon_days == 10);
    CHECK(config.sim.threads == 2);
    CHECK(config.sim.update_mode == UpdateMode::daily_mean);
    CHECK(config.sim.ndcg.gain == GainType::linear);
    CHECK(config.sim.policy.algorithm == Algorithm::gaussian_thompson);
    CHECK(config.data == "searches.jsonl");
    CHECK(config.out == "results");

    const RunConfig defaults = parse_run_config(json::object());
    CHECK(defaults.sim.seed == 0);
    CHECK(defaults.sim.update_mode == UpdateMode::per_observation);
    CHECK(defaults.sim.policy.algorithm == Algorithm::baseline);

    CHECK_THROWS_WITH(parse_run_config({{"polcy", json::object()}}),
                      Catch::Matchers::ContainsSubstring("unknown field \"polcy\""));
    CHECK_THROWS_WITH(parse_run_config({{"update_mode", "hourly"}}),
                      Catch::Matchers::ContainsSubstring("unknown update_mode: hourly"));
}

TEST_CASE("sweep config labels each policy block") {
    const SweepConfig config = parse_sweep_config(
        {{"seed", 5},
         {"data", "searches.jsonl"},
         {"out", "sweep"},
         {"policies",
          json::array({{{"algorithm", "baseline"}},
                       {{"algorithm", "epsilon_greedy"}, {"epsilon", 0.3}},
                       {{"algorithm", "gaussian_thompson"}, {"name", "thompson_tuned"}}})}});
    REQUIRE(config.policies.size() == 3);
    CHECK(config.policies[0].first == "baseline");
    CHECK(config.policies[1].first == "epsilon_greedy_0.3");
    CHECK(config.policies[1].second.epsilon == 0.3);
    CHECK(config.policies[2].first == "thompson_tuned");

    CHECK_THROWS_WITH(parse_sweep_config({{"data", "x"}}),
                      Catch::Matchers::ContainsSubstring("non-empty array"));
    CHECK_THROWS_WITH(parse_sweep_config({{"policies", json::array()}}),
                      Catch::Matchers::ContainsSubstring("non-empty array"));
}

TEST_CASE("report config parses the baseline block and run list") {
    const ReportConfig config = parse_report_config(
        {{"data", "searches.jsonl"},
         {"k", 5},
         {"baseline", {{"name", "neutral"}, {"log", "baseline.jsonl"}}},
         {"runs", json::array({{{"name", "gt"}, {"log", "gt.jsonl"}}})},
         {"out", "report"}});
    CHECK(config.k == 5);
    CHECK(config.baseline_name == "neutral");
    CHECK(config.baseline_log == "baseline.jsonl");
    REQUIRE(config.runs.size() == 1);
    CHECK(config.runs[0] == std::pair<std::string, std::string>{"gt", "gt.jsonl"});

    CHECK(parse_report_config(json::object()).k == 10);
    CHECK(parse_report_config(json::object()).baseline_name == "baseline");

    CHECK_THROWS_WITH(
        parse_report_config({{"runs", json::array({{{"name", "gt"}}})}}),
        Catch::Matchers::ContainsSubstring("every run needs a name and a log"));
    CHECK_THROWS_WITH(parse_report_config({{"baseline", {{"path", "x"}}}}),
                      Catch::Matchers::ContainsSubstring("unknown field \"path\""));
}

TEST_CASE("gen config parses the full planting recipe") {
    const GenConfig config = parse_gen_config(
        {{"seed", 9},
         {"days", 3},
         {"searches_per_day", 200},
         {"items_per_search", 12},
         {"vocab_sizes", {{"brand", 2}, {"device", 3}, {"geo", 4}}},
         {"designated_feature", "geo"},
         {"context_effect", {{"geo_0", 1}, {"geo_1", 7}}},
         {"reward_gap", 0.25},
         {"label_noise", 0.1},
         {"click_rate", 0.4},
         {"juggler_utility_range", {1.6, 2.4}},
         {"juggler_comp_range", {0.8, 1.2}},
         {"with_attributes", true}});
    CHECK(config.seed == 9);
    CHECK(config.days == 3);
    CHECK(config.searches_per_day == 200);
    CHECK(config.items_per_search == 12);
    CHECK(config.vocab_sizes.geo == 4);
    CHECK(config.designated_feature == ContextFeature::geo);
    CHECK(config.context_effect.at("geo_1") == 7);
    CHECK(config.reward_gap == 0.25);
    CHECK(config.label_noise == 0.1);
    CHECK(config.click_rate == 0.4);
    CHECK(config.juggler_utility_range == std::pair<double, double>{1.6, 2.4});
    CHECK(config.with_attributes);

    CHECK_THROWS_WITH(parse_gen_config({{"rewardgap", 0.1}}),
                      Catch::Matchers::ContainsSubstring("unknown field \"rewardgap\""));
    CHECK_THROWS_WITH(parse_gen_config({{"vocab_sizes", {{"brands", 2}}}}),
                      Catch::Matchers::ContainsSubstring("unknown field \"brands\""));
    // validation runs at parse time
    CHECK_THROWS_AS(parse_gen_config({{"reward_gap", 0.0}}), std::invalid_argument);
}
