#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cmath>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "jugmab/domain.hpp"
#include "jugmab/rng.hpp"

namespace jugmab {

enum class Algorithm { baseline, gaussian_thompson, epsilon_greedy, rls_thompson };

inline const char* algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::baseline: return "baseline";
        case Algorithm::gaussian_thompson: return "gaussian_thompson";
        case Algorithm::epsilon_greedy: return "epsilon_greedy";
        case Algorithm::rls_thompson: return "rls_thompson";
    }
    throw std::logic_error("unreachable");
}

inline Algorithm algorithm_from_name(const std::string& name) {
    for (Algorithm a : {Algorithm::baseline, Algorithm::gaussian_thompson,
                        Algorithm::epsilon_greedy, Algorithm::rls_thompson})
        if (name == algorithm_name(a)) return a;
    throw std::invalid_argument("unknown algorithm: " + name);
}

/// Per-policy knobs. The prior defaults are weakly informative for a [0, 1]
/// reward; every one of them is surfaced in the run configuration.
struct PolicyConfig {
    Algorithm algorithm = Algorithm::baseline;
    double epsilon = 0.1;          // epsilon_greedy exploration probability
    double mu0 = 0.5;              // gaussian_thompson prior mean
    double tau0_sq = 1.0;          // gaussian_thompson prior variance
    double lambda = 1.0;           // rls_thompson ridge precision, Sigma0 = I/lambda
    double sigma_obs_sq = 0.05;    // observation noise variance (GT and RLS)
    double optimistic_init = 1.0;  // epsilon_greedy mean for unpulled arms
    FeatureSet features;           // contextual features (rls_thompson only)

    void validate() const {
        if (epsilon < 0.0 || epsilon > 1.0)
            throw std::invalid_argument("epsilon must be in [0, 1]");
        if (tau0_sq <= 0.0 || lambda <= 0.0 || sigma_obs_sq <= 0.0)
            throw std::invalid_argument("prior variances and noise must be positive");
        if (algorithm == Algorithm::rls_thompson && features.empty())
            throw std::invalid_argument("rls_thompson requires at least one context feature");
    }
};

struct PolicyDecision {
    int arm_index = 0;
    bool was_exploration = false;
};

/// One logged interaction used for the day-boundary batch update. The
/// context vector is empty for non-contextual policies.
struct Observation {
    std::vector<double> context_vector;
    int arm_index = 0;
    double reward = 0.0;
};

namespace detail {

inline int argmax_lowest_index(std::span<const double> values) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(values.size()); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

inline void check_observation(const Observation& obs, int arm_count) {
    if (obs.arm_index < 0 || obs.arm_index >= arm_count)
        throw std::out_of_range("observation arm_index out of range: " +
                                std::to_string(obs.arm_index));
    if (!(obs.reward >= 0.0 && obs.reward <= 1.0))
        throw std::invalid_argument("observation reward outside [0, 1]");
}

}  // namespace detail

/// Common contract for all bandit policies. select is const and draws only
/// from the caller-provided stream, so any number of selections may run
/// concurrently against a frozen policy; the engine applies update_batch
/// exclusively at day boundaries.
class Policy {
  public:
    virtual ~Policy() = default;

    virtual PolicyDecision select(std::span<const double> context_vector,
                                  RngStream& rng) const = 0;

    /// Applies observations one by one, in list order.
    virtual void update_batch(std::span<const Observation> observations) = 0;

    /// Complete deterministic state: enough to resume a run and to emit
    /// diagnostics.
    virtual nlohmann::json snapshot() const = 0;
    virtual void restore(const nlohmann::json& snapshot) = 0;

    virtual bool is_contextual() const { return false; }
    virtual int arm_count() const = 0;
};

/// Always plays the neutral arm, i.e. pure upstream-prediction behavior.
class FixedBaselinePolicy final : public Policy {
  public:
    explicit FixedBaselinePolicy(const ArmSpace& arm_space)
        : arm_count_(arm_space.size()), neutral_index_(arm_space.neutral_index()) {}

    PolicyDecision select(std::span<const double>, RngStream&) const override {
        return {neutral_index_, false};
    }

    void update_batch(std::span<const Observation> observations) override {
        for (const Observation& obs : observations)
            detail::check_observation(obs, arm_count_);
    }

    nlohmann::json snapshot() const override {
        return {{"algorithm", "baseline"}, {"neutral_index", neutral_index_}};
    }

    void restore(const nlohmann::json& snapshot) override {
        neutral_index_ = snapshot.at("neutral_index").get<int>();
    }

    int arm_count() const override { return arm_count_; }

  private:
    int arm_count_;
    int neutral_index_;
};

struct GaussianArmState {
    double posterior_mean = 0.0;
    double posterior_variance = 1.0;
    long pull_count = 0;
};

/// Classical Thompson sampling with a per-arm Gaussian posterior over the
/// mean reward, observation variance known.
class GaussianThompsonPolicy final : public Policy {
  public:
    GaussianThompsonPolicy(const ArmSpace& arm_space, double mu0, double tau0_sq,
                           double sigma_obs_sq)
        : sigma_obs_sq_(sigma_obs_sq),
          arms_(static_cast<std::size_t>(arm_space.size()), GaussianArmState{mu0, tau0_sq, 0}) {}

    PolicyDecision select(std::span<const double>, RngStream& rng) const override {
        std::vector<double> sampled(arms_.size());
        for (std::size_t a = 0; a < arms_.size(); ++a)
            sampled[a] =
                arms_[a].posterior_mean + std::sqrt(arms_[a].posterior_variance) * rng.normal();
        return {detail::argmax_lowest_index(sampled), false};
    }

    void update_batch(std::span<const Observation> observations) override {
        for (const Observation& obs : observations) {
            detail::check_observation(obs, arm_count());
            GaussianArmState& arm = arms_[static_cast<std::size_t>(obs.arm_index)];
            const double precision = 1.0 / arm.posterior_variance + 1.0 / sigma_obs_sq_;
            const double variance = 1.0 / precision;
            arm.posterior_mean = variance * (arm.posterior_mean / arm.posterior_variance +
                                             obs.reward / sigma_obs_sq_);
            arm.posterior_variance = variance;
            arm.pull_count += 1;
        }
    }

    nlohmann::json snapshot() const override {
        nlohmann::json arms = nlohmann::json::array();
        for (const GaussianArmState& arm : arms_)
            arms.push_back({{"mean", arm.posterior_mean},
                            {"variance", arm.posterior_variance},
                            {"pulls", arm.pull_count}});
        return {{"algorithm", "gaussian_thompson"},
                {"sigma_obs_sq", sigma_obs_sq_},
                {"arms", std::move(arms)}};
    }

    void restore(const nlohmann::json& snapshot) override {
        const auto& arms = snapshot.at("arms");
        if (arms.size() != arms_.size())
            throw std::invalid_argument("snapshot arm count mismatch");
        for (std::size_t a = 0; a < arms_.size(); ++a) {
            arms_[a].posterior_mean = arms[a].at("mean").get<double>();
            arms_[a].posterior_variance = arms[a].at("variance").get<double>();
            arms_[a].pull_count = arms[a].at("pulls").get<long>();
        }
    }

    int arm_count() const override { return static_cast<int>(arms_.size()); }

    const GaussianArmState& arm_state(int arm) const {
        return arms_[static_cast<std::size_t>(arm)];
    }

  private:
    double sigma_obs_sq_;
    std::vector<GaussianArmState> arms_;
};

struct EmpiricalArmState {
    double mean_reward = 0.0;
    long pull_count = 0;
};

/// Canonical epsilon-greedy over per-arm empirical means. Unpulled arms
/// carry an optimistic mean so every arm is tried before exploitation locks
/// in.
class EpsilonGreedyPolicy final : public Policy {
  public:
    EpsilonGreedyPolicy(const ArmSpace& arm_space, double epsilon, double optimistic_init)
        : epsilon_(epsilon),
          arms_(static_cast<std::size_t>(arm_space.size()),
                EmpiricalArmState{optimistic_init, 0}) {}

    PolicyDecision select(std::span<const double>, RngStream& rng) const override {
        if (rng.uniform() < epsilon_) {
            const int arm = static_cast<int>(rng.uniform_below(arms_.size()));
            return {arm, true};
        }
        std::vector<double> means(arms_.size());
        for (std::size_t a = 0; a < arms_.size(); ++a) means[a] = arms_[a].mean_reward;
        return {detail::argmax_lowest_index(means), false};
    }

    void update_batch(std::span<const Observation> observations) override {
        for (const Observation& obs : observations) {
            detail::check_observation(obs, arm_count());
            EmpiricalArmState& arm = arms_[static_cast<std::size_t>(obs.arm_index)];
            arm.pull_count += 1;
            if (arm.pull_count == 1)
                arm.mean_reward = obs.reward;  // optimistic prior carries no weight
            else
                arm.mean_reward +=
                    (obs.reward - arm.mean_reward) / static_cast<double>(arm.pull_count);
        }
    }

    nlohmann::json snapshot() const override {
        nlohmann::json arms = nlohmann::json::array();
        for (const EmpiricalArmState& arm : arms_)
            arms.push_back({{"mean", arm.mean_reward}, {"pulls", arm.pull_count}});
        return {{"algorithm", "epsilon_greedy"}, {"epsilon", epsilon_}, {"arms", std::move(arms)}};
    }

    void restore(const nlohmann::json& snapshot) override {
        const auto& arms = snapshot.at("arms");
        if (arms.size() != arms_.size())
            throw std::invalid_argument("snapshot arm count mismatch");
        for (std::size_t a = 0; a < arms_.size(); ++a) {
            arms_[a].mean_reward = arms[a].at("mean").get<double>();
            arms_[a].pull_count = arms[a].at("pulls").get<long>();
        }
    }

    int arm_count() const override { return static_cast<int>(arms_.size()); }

    const EmpiricalArmState& arm_state(int arm) const {
        return arms_[static_cast<std::size_t>(arm)];
    }

  private:
    double epsilon_;
    std::vector<EmpiricalArmState> arms_;
};

/// Per-arm Bayesian ridge regression (recursive least squares) with Thompson
/// sampling over the coefficient posterior N(mu_a, Sigma_a).
///
/// Each update advances two algebraically equivalent representations: the
/// covariance recursion (Sherman-Morrison rank-one downdate with the usual
/// RLS gain) and the natural parameters (precision A = Sigma^-1 and b = A mu)
/// which support an independent solve of the same posterior mean. Tests hold
/// the two routes to 1e-8 of each other.
class RlsThompsonPolicy final : public Policy {
  public:
    RlsThompsonPolicy(const ArmSpace& arm_space, int feature_dim, double lambda,
                      double sigma_obs_sq)
        : dim_(feature_dim), sigma_obs_sq_(sigma_obs_sq) {
        if (feature_dim < 1) throw std::invalid_argument("feature_dim must be >= 1");
        arms_.resize(static_cast<std::size_t>(arm_space.size()));
        for (ArmState& arm : arms_) {
            arm.mean = Eigen::VectorXd::Zero(dim_);
            arm.covariance = Eigen::MatrixXd::Identity(dim_, dim_) / lambda;
            arm.precision = Eigen::MatrixXd::Identity(dim_, dim_) * lambda;
            arm.b = Eigen::VectorXd::Zero(dim_);
            arm.pull_count = 0;
        }
        refresh_cholesky();
    }

    PolicyDecision select(std::span<const double> context_vector,
                          RngStream& rng) const override {
        if (static_cast<int>(context_vector.size()) != dim_)
            throw std::invalid_argument(
                "context vector dimension mismatch: got " +
                std::to_string(context_vector.size()) + ", expected " + std::to_string(dim_));
        const Eigen::Map<const Eigen::VectorXd> x(context_vector.data(), dim_);
        std::vector<double> scores(arms_.size());
        Eigen::VectorXd z(dim_);
        for (std::size_t a = 0; a < arms_.size(); ++a) {
            for (int i = 0; i < dim_; ++i) z[i] = rng.normal();
            const Eigen::VectorXd theta = arms_[a].mean + arms_[a].chol_lower * z;
            scores[a] = x.dot(theta);
        }
        return {detail::argmax_lowest_index(scores), false};
    }

    void update_batch(std::span<const Observation> observations) override {
        for (const Observation& obs : observations) {
            detail::check_observation(obs, arm_count());
            if (static_cast<int>(obs.context_vector.size()) != dim_)
                throw std::invalid_argument("observation context dimension mismatch");
            const Eigen::Map<const Eigen::VectorXd> x(obs.context_vector.data(), dim_);
            ArmState& arm = arms_[static_cast<std::size_t>(obs.arm_index)];

            const Eigen::VectorXd cov_x = arm.covariance * x;
            const double denom = sigma_obs_sq_ + x.dot(cov_x);
            const Eigen::VectorXd gain = cov_x / denom;
            arm.mean += gain * (obs.reward - x.dot(arm.mean));
            arm.covariance -= gain * cov_x.transpose();
            arm.covariance = ((arm.covariance + arm.covariance.transpose()) * 0.5).eval();

            arm.precision += (x * x.transpose()) / sigma_obs_sq_;
            arm.b += x * (obs.reward / sigma_obs_sq_);
            arm.pull_count += 1;
        }
        refresh_cholesky();
    }

    nlohmann::json snapshot() const override {
        nlohmann::json arms = nlohmann::json::array();
        for (const ArmState& arm : arms_) {
            arms.push_back({{"mean", to_json(arm.mean)},
                            {"covariance", to_json(arm.covariance)},
                            {"precision", to_json(arm.precision)},
                            {"b", to_json(arm.b)},
                            {"pulls", arm.pull_count}});
        }
        return {{"algorithm", "rls_thompson"},
                {"dim", dim_},
                {"sigma_obs_sq", sigma_obs_sq_},
                {"arms", std::move(arms)}};
    }

    void restore(const nlohmann::json& snapshot) override {
        if (snapshot.at("dim").get<int>() != dim_)
            throw std::invalid_argument("snapshot dimension mismatch");
        const auto& arms = snapshot.at("arms");
        if (arms.size() != arms_.size())
            throw std::invalid_argument("snapshot arm count mismatch");
        for (std::size_t a = 0; a < arms_.size(); ++a) {
            arms_[a].mean = vector_from_json(arms[a].at("mean"));
            arms_[a].covariance = matrix_from_json(arms[a].at("covariance"));
            arms_[a].precision = matrix_from_json(arms[a].at("precision"));
            arms_[a].b = vector_from_json(arms[a].at("b"));
            arms_[a].pull_count = arms[a].at("pulls").get<long>();
        }
        refresh_cholesky();
    }

    bool is_contextual() const override { return true; }
    int arm_count() const override { return static_cast<int>(arms_.size()); }
    int feature_dim() const { return dim_; }

    const Eigen::VectorXd& mean(int arm) const {
        return arms_[static_cast<std::size_t>(arm)].mean;
    }
    const Eigen::MatrixXd& covariance(int arm) const {
        return arms_[static_cast<std::size_t>(arm)].covariance;
    }
    long pull_count(int arm) const { return arms_[static_cast<std::size_t>(arm)].pull_count; }

    /// Posterior mean recovered from the natural parameters: solves
    /// A mu = b with the prior folded into A. Independent of the
    /// Sherman-Morrison recursion above.
    Eigen::VectorXd mean_via_precision(int arm) const {
        const ArmState& state = arms_[static_cast<std::size_t>(arm)];
        return state.precision.llt().solve(state.b);
    }

    Eigen::MatrixXd covariance_via_precision(int arm) const {
        const ArmState& state = arms_[static_cast<std::size_t>(arm)];
        return state.precision.llt().solve(Eigen::MatrixXd::Identity(dim_, dim_));
    }

  private:
    struct ArmState {
        Eigen::VectorXd mean;
        Eigen::MatrixXd covariance;
        Eigen::MatrixXd precision;
        Eigen::VectorXd b;
        Eigen::MatrixXd chol_lower;
        long pull_count = 0;
    };

    void refresh_cholesky() {
        for (ArmState& arm : arms_) {
            const Eigen::LLT<Eigen::MatrixXd> llt(arm.covariance);
            if (llt.info() != Eigen::Success)
                throw std::runtime_error("rls covariance lost positive definiteness");
            arm.chol_lower = llt.matrixL();
        }
    }

    static nlohmann::json to_json(const Eigen::VectorXd& v) {
        nlohmann::json out = nlohmann::json::array();
        for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
        return out;
    }

    static nlohmann::json to_json(const Eigen::MatrixXd& m) {
        nlohmann::json out = nlohmann::json::array();
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
            out.push_back(std::move(row));
        }
        return out;
    }

    static Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
        Eigen::VectorXd v(j.size());
        for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i];
        return v;
    }

    static Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
        const std::size_t rows = j.size();
        const std::size_t cols = rows == 0 ? 0 : j[0].size();
        Eigen::MatrixXd m(rows, cols);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c)
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c];
        return m;
    }

    int dim_;
    double sigma_obs_sq_;
    std::vector<ArmState> arms_;
};

inline std::unique_ptr<Policy> make_policy(const PolicyConfig& config, const ArmSpace& arm_space,
                                           const ContextVocab& vocab) {
    config.validate();
    switch (config.algorithm) {
        case Algorithm::baseline:
            return std::make_unique<FixedBaselinePolicy>(arm_space);
        case Algorithm::gaussian_thompson:
            return std::make_unique<GaussianThompsonPolicy>(arm_space, config.mu0,
                                                            config.tau0_sq, config.sigma_obs_sq);
        case Algorithm::epsilon_greedy:
            return std::make_unique<EpsilonGreedyPolicy>(arm_space, config.epsilon,
                                                         config.optimistic_init);
        case Algorithm::rls_thompson:
            return std::make_unique<RlsThompsonPolicy>(arm_space,
                                                       feature_dim(vocab, config.features),
                                                       config.lambda, config.sigma_obs_sq);
    }
    throw std::logic_error("unreachable");
}

}  // namespace jugmab
