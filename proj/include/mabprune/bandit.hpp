#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mabprune/rng.hpp"

namespace mabprune {

/// Running statistics of one arm.
struct ArmState {
    long long plays = 0;
    double mean_reward = 0.0;
    long long wins = 0;
    long long losses = 0;
};

enum class PolicyKind { Ucb1, KlUcb, Thompson, BayesUcb, Softmax, Wsls };

enum class RewardKind { Continuous, Bernoulli };

/// The reward family an arm-selection policy consumes: posterior-based
/// policies (Thompson, Bayes-UCB) take Bernoulli rewards, the rest take the
/// graded continuous mapping.
RewardKind reward_kind(PolicyKind kind);

std::string policy_name(PolicyKind kind);

/// Parameters of the continuous reward map
///   reward = max(0, threshold + delta) / constant
/// where constant = threshold + delta_max, making reward = 1 exactly at the
/// largest possible score change.
struct RewardConfig {
    double threshold = 0.05;
    double delta_max = 4.5;  // |delta score| bound: alpha + beta + gamma at defaults

    double constant() const { return threshold + delta_max; }
    void validate() const;
};

struct BanditPolicy {
    PolicyKind kind = PolicyKind::Ucb1;
    double temperature = 0.2;   // Softmax only
    double kl_tolerance = 1e-9; // KL-UCB bisection tolerance
    // Win-Stay-Lose-Shift memory; select_arm records the chosen arm here, the
    // caller records whether it won after observing the reward.
    std::optional<std::size_t> last_arm;
    std::optional<bool> last_won;

    void validate() const;
};

double continuous_reward(double delta, const RewardConfig& rc);

/// 1 for a strict improvement, 0 otherwise.
double bernoulli_reward(double delta);

/// mean + sqrt(2 ln t / n).
double ucb1_index(const ArmState& arm, long long t);

/// Largest q in [mean, 1] with n * kl_bern(mean, q) <= ln t, by bisection.
double kl_ucb_index(const ArmState& arm, long long t, double tol);

/// Draw from the Beta(1 + wins, 1 + losses) posterior.
double thompson_sample(const ArmState& arm, Rng& rng);

/// Quantile at level 1 - 1/t of the Beta(1 + wins, 1 + losses) posterior.
double bayes_ucb_index(const ArmState& arm, long long t);

/// p_i proportional to exp(mean_i / temperature); max-subtracted for
/// overflow safety. Requires every arm played at least once.
Eigen::VectorXd softmax_probabilities(const std::vector<ArmState>& arms, double temperature);

/// One arm pull. Any unplayed arm is chosen first (uniformly among unplayed);
/// otherwise the policy dispatches on its kind. Index ties go to the lowest
/// arm. Records the choice in policy.last_arm.
std::size_t select_arm(BanditPolicy& policy, const std::vector<ArmState>& arms, long long t,
                       Rng& rng);

/// Running-mean update: n += 1; mean <- ((n-1) mean + reward) / n. `win`
/// tallies the strict-improvement count the posterior policies bank on.
void update_arm(ArmState& arm, double reward, bool win);

} // namespace mabprune
