#include <catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <numeric>
#include <vector>

#include "jugmab/policies.hpp"

using namespace jugmab;

namespace {

const std::vector<double> kNoContext;

// Conjugate normal-normal posterior computed in one shot, independently of
// the sequential recursion inside the policy.
std::pair<double, double> normal_posterior(double mu0, double tau0_sq, double sigma_sq,
                                           const std::vector<double>& rewards) {
    const double n = static_cast<double>(rewards.size());
    const double precision = 1.0 / tau0_sq + n / sigma_sq;
    const double variance = 1.0 / precision;
    const double sum = std::accumulate(rewards.begin(), rewards.end(), 0.0);
    return {variance * (mu0 / tau0_sq + sum / sigma_sq), variance};
}

std::vector<Observation> plain_observations(int arm, const std::vector<double>& rewards) {
    std::vector<Observation> out;
    for (double r : rewards) out.push_back({{}, arm, r});
    return out;
}

}  // namespace

TEST_CASE("argmax breaks ties toward the lowest index") {
    const std::vector<double> tied{0.5, 0.5, 0.5};
    CHECK(detail::argmax_lowest_index(tied) == 0);
    const std::vector<double> later{0.1, 0.9, 0.9, 0.3};
    CHECK(detail::argmax_lowest_index(later) == 1);
    const std::vector<double> single{2.0};
    CHECK(detail::argmax_lowest_index(single) == 0);
}

TEST_CASE("observation validation rejects bad arms and rewards") {
    FixedBaselinePolicy policy{ArmSpace{}};
    CHECK_THROWS_AS(policy.update_batch(plain_observations(-1, {0.5})), std::out_of_range);
    CHECK_THROWS_AS(policy.update_batch(plain_observations(9, {0.5})), std::out_of_range);
    CHECK_THROWS_AS(policy.update_batch(plain_observations(0, {1.5})), std::invalid_argument);
    CHECK_THROWS_AS(policy.update_batch(plain_observations(0, {-0.1})), std::invalid_argument);
    CHECK_THROWS_AS(
        policy.update_batch(plain_observations(0, {std::numeric_limits<double>::quiet_NaN()})),
        std::invalid_argument);
    CHECK_NOTHROW(policy.update_batch(plain_observations(0, {0.0, 1.0})));
}

TEST_CASE("fixed baseline always plays the neutral arm") {
    const ArmSpace space;
    FixedBaselinePolicy policy{space};
    RngStream rng(1);
    for (int i = 0; i < 20; ++i) {
        const PolicyDecision d = policy.select(kNoContext, rng);
        CHECK(d.arm_index == space.neutral_index());
        CHECK_FALSE(d.was_exploration);
    }
    CHECK(policy.arm_count() == 9);
    CHECK_FALSE(policy.is_contextual());
}

TEST_CASE("gaussian thompson posterior matches the conjugate closed form") {
    const double mu0 = 0.5, tau0_sq = 1.0, sigma_sq = 0.05;
    RngStream rng(11);
    for (int k : {1, 5, 50}) {
        GaussianThompsonPolicy policy{ArmSpace{}, mu0, tau0_sq, sigma_sq};
        std::vector<double> rewards;
        for (int i = 0; i < k; ++i) rewards.push_back(rng.uniform());
        policy.update_batch(plain_observations(3, rewards));

        const auto [mean, variance] = normal_posterior(mu0, tau0_sq, sigma_sq, rewards);
        CHECK(policy.arm_state(3).posterior_mean == Catch::Approx(mean).margin(1e-12));
        CHECK(policy.arm_state(3).posterior_variance == Catch::Approx(variance).margin(1e-12));
        CHECK(policy.arm_state(3).pull_count == k);
        // Untouched arms keep the prior.
        CHECK(policy.arm_state(0).posterior_mean == mu0);
        CHECK(policy.arm_state(0).posterior_variance == tau0_sq);
    }
}

TEST_CASE("gaussian thompson unit-variance single update halves uncertainty") {
    GaussianThompsonPolicy policy{ArmSpace{}, 0.0, 1.0, 1.0};
    policy.update_batch(plain_observations(0, {1.0}));
    CHECK(policy.arm_state(0).posterior_mean == Catch::Approx(0.5).margin(1e-15));
    CHECK(policy.arm_state(0).posterior_variance == Catch::Approx(0.5).margin(1e-15));
}

TEST_CASE("gaussian thompson variance decreases strictly with every pull") {
    GaussianThompsonPolicy policy{ArmSpace{}, 0.5, 1.0, 0.05};
    double previous = policy.arm_state(2).posterior_variance;
    RngStream rng(5);
    for (int i = 0; i < 100; ++i) {
        policy.update_batch(plain_observations(2, {rng.uniform()}));
        const double current = policy.arm_state(2).posterior_variance;
        REQUIRE(current < previous);
        previous = current;
    }
}

TEST_CASE("gaussian thompson concentrates on the clearly best arm") {
    GaussianThompsonPolicy policy{ArmSpace{}, 0.5, 1.0, 0.05};
    std::vector<Observation> batch;
    for (int a = 0; a < 9; ++a)
        for (int i = 0; i < (a == 7 ? 200 : 20); ++i)
            batch.push_back({{}, a, a == 7 ? 0.95 : 0.1});
    policy.update_batch(batch);

    RngStream rng(17);
    int hits = 0;
    for (int i = 0; i < 1000; ++i)
        if (policy.select(kNoContext, rng).arm_index == 7) ++hits;
    CHECK(hits > 950);
}

TEST_CASE("epsilon zero with optimism sweeps every arm once then exploits") {
    EpsilonGreedyPolicy policy{ArmSpace{}, 0.0, 1.0};
    RngStream rng(3);
    for (int a = 0; a < 9; ++a) {
        const PolicyDecision d = policy.select(kNoContext, rng);
        REQUIRE(d.arm_index == a);  // previous arms fell below the optimistic 1.0
        policy.update_batch(plain_observations(a, {a == 6 ? 0.9 : 0.2}));
    }
    for (int i = 0; i < 50; ++i) CHECK(policy.select(kNoContext, rng).arm_index == 6);
}

TEST_CASE("epsilon greedy empirical mean is the exact running average") {
    EpsilonGreedyPolicy policy{ArmSpace{}, 0.1, 1.0};
    const std::vector<double> rewards{0.2, 0.8, 0.5, 0.9};
    policy.update_batch(plain_observations(4, rewards));
    CHECK(policy.arm_state(4).mean_reward == Catch::Approx(0.6).margin(1e-12));
    CHECK(policy.arm_state(4).pull_count == 4);
    // First real pull replaces the optimistic placeholder entirely.
    policy.update_batch(plain_observations(1, {0.3}));
    CHECK(policy.arm_state(1).mean_reward == 0.3);
}

TEST_CASE("epsilon greedy means are invariant to observation order") {
    RngStream rng(29);
    std::vector<Observation> batch;
    for (int i = 0; i < 200; ++i)
        batch.push_back({{}, static_cast<int>(rng.uniform_below(9)), rng.uniform()});

    EpsilonGreedyPolicy forward{ArmSpace{}, 0.1, 1.0};
    forward.update_batch(batch);
    std::reverse(batch.begin(), batch.end());
    EpsilonGreedyPolicy backward{ArmSpace{}, 0.1, 1.0};
    backward.update_batch(batch);

    for (int a = 0; a < 9; ++a) {
        CHECK(forward.arm_state(a).pull_count == backward.arm_state(a).pull_count);
        CHECK(forward.arm_state(a).mean_reward ==
              Catch::Approx(backward.arm_state(a).mean_reward).margin(1e-12));
    }
}

TEST_CASE("epsilon greedy explores at the configured rate") {
    const double epsilon = 0.3;
    EpsilonGreedyPolicy policy{ArmSpace{}, epsilon, 1.0};
    RngStream rng(41);
    const int n = 100000;
    int explorations = 0;
    std::vector<int> explored_arm_counts(9, 0);
    for (int i = 0; i < n; ++i) {
        const PolicyDecision d = policy.select(kNoContext, rng);
        if (d.was_exploration) {
            ++explorations;
            ++explored_arm_counts[static_cast<std::size_t>(d.arm_index)];
        }
    }
    const double rate = static_cast<double>(explorations) / n;
    const double tolerance = 4.0 * std::sqrt(epsilon * (1.0 - epsilon) / n);
    CHECK(std::abs(rate - epsilon) < tolerance);
    for (int count : explored_arm_counts) CHECK(count > 0);  // exploration covers all arms
}

TEST_CASE("rls posterior matches a batch ridge solve within 1e-8") {
    const int dim = 4;
    const double lambda = 1.0, sigma_sq = 0.05;
    ArmSpace space;
    RlsThompsonPolicy policy{space, dim, lambda, sigma_sq};

    RngStream rng(53);
    const int n = 60;
    Eigen::MatrixXd X(n, dim);
    Eigen::VectorXd y(n);
    std::vector<Observation> batch;
    for (int i = 0; i < n; ++i) {
        Observation obs;
        obs.arm_index = 2;
        obs.reward = rng.uniform();
        for (int j = 0; j < dim; ++j) {
            const double v = rng.uniform() * 2.0 - 1.0;
            obs.context_vector.push_back(v);
            X(i, j) = v;
        }
        y(i) = obs.reward;
        batch.push_back(std::move(obs));
    }
    policy.update_batch(batch);

    const Eigen::MatrixXd A =
        lambda * Eigen::MatrixXd::Identity(dim, dim) + X.transpose() * X / sigma_sq;
    const Eigen::VectorXd theta = A.ldlt().solve(X.transpose() * y / sigma_sq);
    const Eigen::MatrixXd cov = A.inverse();

    CHECK((policy.mean(2) - theta).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((policy.covariance(2) - cov).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(policy.pull_count(2) == n);
    // Arms that saw no data keep the prior.
    CHECK(policy.mean(0).isZero());
    CHECK((policy.covariance(0) - Eigen::MatrixXd::Identity(dim, dim) / lambda).norm() == 0.0);
}

TEST_CASE("rls covariance recursion agrees with the precision-form solve") {
    RlsThompsonPolicy policy{ArmSpace{}, 3, 2.0, 0.05};
    RngStream rng(67);
    std::vector<Observation> batch;
    for (int i = 0; i < 500; ++i) {
        Observation obs;
        obs.arm_index = static_cast<int>(rng.uniform_below(9));
        obs.reward = rng.uniform();
        obs.context_vector = {1.0, rng.uniform(), rng.uniform() * 3.0 - 1.5};
        batch.push_back(std::move(obs));
    }
    policy.update_batch(batch);

    for (int a = 0; a < 9; ++a) {
        CHECK((policy.mean(a) - policy.mean_via_precision(a)).cwiseAbs().maxCoeff() < 1e-8);
        CHECK((policy.covariance(a) - policy.covariance_via_precision(a))
                  .cwiseAbs()
                  .maxCoeff() < 1e-8);
    }
}

TEST_CASE("rls with one feature reduces to the scalar gaussian posterior") {
    const double sigma_sq = 0.05;
    RlsThompsonPolicy rls{ArmSpace{}, 1, 1.0, sigma_sq};          // Sigma0 = 1
    GaussianThompsonPolicy scalar{ArmSpace{}, 0.0, 1.0, sigma_sq};  // same zero-mean prior

    RngStream rng(71);
    for (int step = 0; step < 40; ++step) {
        const int arm = static_cast<int>(rng.uniform_below(9));
        const double reward = rng.uniform();
        std::vector<Observation> rls_obs{{{1.0}, arm, reward}};
        std::vector<Observation> scalar_obs{{{}, arm, reward}};
        rls.update_batch(rls_obs);
        scalar.update_batch(scalar_obs);
    }
    for (int a = 0; a < 9; ++a) {
        CHECK(rls.mean(a)(0) == Catch::Approx(scalar.arm_state(a).posterior_mean).margin(1e-10));
        CHECK(rls.covariance(a)(0, 0) ==
              Catch::Approx(scalar.arm_state(a).posterior_variance).margin(1e-10));
    }
}

TEST_CASE("rls stays positive definite across thousands of one-hot updates") {
    RlsThompsonPolicy policy{ArmSpace{}, 4, 1.0, 0.05};
    RngStream rng(83);
    std::vector<Observation> batch;
    for (int i = 0; i < 10000; ++i) {
        Observation obs;
        obs.arm_index = static_cast<int>(rng.uniform_below(9));
        obs.reward = rng.uniform();
        obs.context_vector = {1.0, 0.0, 0.0, 0.0};
        obs.context_vector[1 + rng.uniform_below(3)] = 1.0;
        batch.push_back(std::move(obs));
    }
    CHECK_NOTHROW(policy.update_batch(batch));  // would throw if the factorization failed
    for (int a = 0; a < 9; ++a) {
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(policy.covariance(a));
        CHECK(eig.eigenvalues().minCoeff() > 0.0);
        CHECK((policy.mean(a) - policy.mean_via_precision(a)).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("rls rejects mismatched context dimensions") {
    RlsThompsonPolicy policy{ArmSpace{}, 3, 1.0, 0.05};
    RngStream rng(1);
    const std::vector<double> short_context{1.0, 0.0};
    CHECK_THROWS_WITH(policy.select(short_context, rng),
                      Catch::Matchers::ContainsSubstring("dimension mismatch"));
    std::vector<Observation> bad{{{1.0}, 0, 0.5}};
    CHECK_THROWS_WITH(policy.update_batch(bad),
                      Catch::Matchers::ContainsSubstring("dimension mismatch"));
    CHECK_THROWS_AS((RlsThompsonPolicy{ArmSpace{}, 0, 1.0, 0.05}), std::invalid_argument);
}

TEST_CASE("selection is deterministic given the same stream seed") {
    GaussianThompsonPolicy policy{ArmSpace{}, 0.5, 1.0, 0.05};
    std::vector<int> first, second;
    {
        RngStream rng(123);
        for (int i = 0; i < 50; ++i) first.push_back(policy.select(kNoContext, rng).arm_index);
    }
    {
        RngStream rng(123);
        for (int i = 0; i < 50; ++i) second.push_back(policy.select(kNoContext, rng).arm_index);
    }
    CHECK(first == second);
}

TEST_CASE("select leaves policy state untouched") {
    GaussianThompsonPolicy policy{ArmSpace{}, 0.5, 1.0, 0.05};
    policy.update_batch(plain_observations(1, {0.7, 0.4}));
    const std::string before = policy.snapshot().dump();
    RngStream rng(9);
    for (int i = 0; i < 100; ++i) policy.select(kNoContext, rng);
    CHECK(policy.snapshot().dump() == before);
}

TEST_CASE("an empty batch is a no-op for every policy") {
    const ContextVocab vocab{{"b0", "b1"}, {"d0"}, {"g0"}};
    for (Algorithm algorithm : {Algorithm::baseline, Algorithm::gaussian_thompson,
                                Algorithm::epsilon_greedy, Algorithm::rls_thompson}) {
        PolicyConfig config;
        config.algorithm = algorithm;
        config.features = FeatureSet::of({ContextFeature::brand});
        const auto policy = make_policy(config, ArmSpace{}, vocab);
        const std::string before = policy->snapshot().dump();
        policy->update_batch({});
        CHECK(policy->snapshot().dump() == before);
    }
}

TEST_CASE("snapshot and restore round-trip byte-identically") {
    const ContextVocab vocab{{"b0", "b1", "b2"}, {"d0", "d1"}, {"g0"}};
    RngStream data_rng(7);

    for (Algorithm algorithm : {Algorithm::baseline, Algorithm::gaussian_thompson,
                                Algorithm::epsilon_greedy, Algorithm::rls_thompson}) {
        PolicyConfig config;
        config.algorithm = algorithm;
        config.features = FeatureSet::of({ContextFeature::brand, ContextFeature::device});
        const auto original = make_policy(config, ArmSpace{}, vocab);

        std::vector<Observation> batch;
        const int dim = feature_dim(vocab, config.features);
        for (int i = 0; i < 30; ++i) {
            Observation obs;
            obs.arm_index = static_cast<int>(data_rng.uniform_below(9));
            obs.reward = data_rng.uniform();
            if (original->is_contextual()) {
                obs.context_vector.assign(static_cast<std::size_t>(dim), 0.0);
                obs.context_vector[0] = 1.0;
                obs.context_vector[1 + data_rng.uniform_below(3)] = 1.0;
                obs.context_vector[4 + data_rng.uniform_below(2)] = 1.0;
            }
            batch.push_back(std::move(obs));
        }
        original->update_batch(batch);

        const nlohmann::json saved = original->snapshot();
        const auto restored = make_policy(config, ArmSpace{}, vocab);
        restored->restore(saved);
        CHECK(restored->snapshot().dump() == saved.dump());

        // Restored state drives identical future behavior.
        RngStream rng_a(99), rng_b(99);
        std::vector<double> context(static_cast<std::size_t>(dim), 0.0);
        if (original->is_contextual()) {
            context[0] = 1.0;
            context[1] = 1.0;
            context[4] = 1.0;
        }
        for (int i = 0; i < 25; ++i)
            CHECK(original->select(context, rng_a).arm_index ==
                  restored->select(context, rng_b).arm_index);
    }
}

TEST_CASE("restore rejects incompatible snapshots") {
    GaussianThompsonPolicy policy{ArmSpace{}, 0.5, 1.0, 0.05};
    nlohmann::json snapshot = policy.snapshot();
    snapshot["arms"].erase(0);
    CHECK_THROWS_WITH(policy.restore(snapshot),
                      Catch::Matchers::ContainsSubstring("arm count mismatch"));

    RlsThompsonPolicy rls{ArmSpace{}, 3, 1.0, 0.05};
    nlohmann::json rls_snapshot = rls.snapshot();
    rls_snapshot["dim"] = 5;
    CHECK_THROWS_WITH(rls.restore(rls_snapshot),
                      Catch::Matchers::ContainsSubstring("dimension mismatch"));
}

TEST_CASE("policy config validation pins the legal ranges") {
    PolicyConfig config;
    CHECK_NOTHROW(config.validate());

    config.epsilon = 1.5;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config.epsilon = -0.1;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config.epsilon = 0.1;

    config.tau0_sq = 0.0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config.tau0_sq = 1.0;
    config.sigma_obs_sq = -1.0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config.sigma_obs_sq = 0.05;

    config.algorithm = Algorithm::rls_thompson;
    CHECK_THROWS_WITH(config.validate(),
                      Catch::Matchers::ContainsSubstring("context feature"));
    config.features = FeatureSet::of({ContextFeature::brand});
    CHECK_NOTHROW(config.validate());
}

TEST_CASE("make_policy dispatches on the algorithm and wires contextual dims") {
    const ContextVocab vocab{{"b0", "b1"}, {"d0", "d1", "d2"}, {"g0"}};
    PolicyConfig config;

    config.algorithm = Algorithm::baseline;
    CHECK(make_policy(config, ArmSpace{}, vocab)->snapshot().at("algorithm") == "baseline");

    config.algorithm = Algorithm::gaussian_thompson;
    const auto gt = make_policy(config, ArmSpace{}, vocab);
    CHECK(gt->snapshot().at("algorithm") == "gaussian_thompson");
    CHECK_FALSE(gt->is_contextual());

    config.algorithm = Algorithm::rls_thompson;
    config.features = FeatureSet::of({ContextFeature::brand, ContextFeature::device});
    const auto rls = make_policy(config, ArmSpace{}, vocab);
    CHECK(rls->is_contextual());
    CHECK(dynamic_cast<RlsThompsonPolicy&>(*rls).feature_dim() == 6);  // 1 + 2 + 3

    CHECK(algorithm_from_name("epsilon_greedy") == Algorithm::epsilon_greedy);
    CHECK_THROWS_AS(algorithm_from_name("ucb"), std::invalid_argument);
}
