#include "mabprune/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mabprune/special_functions.hpp"

namespace mabprune {

RewardKind reward_kind(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::Thompson:
        case PolicyKind::BayesUcb:
            return RewardKind::Bernoulli;
        default:
            return RewardKind::Continuous;
    }
}

std::string policy_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::Ucb1: return "ucb1";
        case PolicyKind::KlUcb: return "kl_ucb";
        case PolicyKind::Thompson: return "thompson";
        case PolicyKind::BayesUcb: return "bayes_ucb";
        case PolicyKind::Softmax: return "softmax";
        case PolicyKind::Wsls: return "wsls";
    }
    throw std::logic_error("policy_name: unknown kind");
}

void RewardConfig::validate() const {
    if (!(threshold >= 0.0)) throw std::invalid_argument("RewardConfig: threshold must be >= 0");
    if (!(delta_max > 0.0)) throw std::invalid_argument("RewardConfig: delta_max must be > 0");
}

void BanditPolicy::validate() const {
    if (!(temperature > 0.0)) throw std::invalid_argument("BanditPolicy: temperature must be > 0");
    if (!(kl_tolerance > 0.0)) throw std::invalid_argument("BanditPolicy: kl_tolerance must be > 0");
}

double continuous_reward(double delta, const RewardConfig& rc) {
    rc.validate();
    return std::max(0.0, rc.threshold + delta) / rc.constant();
}

double bernoulli_reward(double delta) {
    return delta > 0.0 ? 1.0 : 0.0;
}

double ucb1_index(const ArmState& arm, long long t) {
    if (arm.plays < 1) throw std::logic_error("ucb1_index: arm has never been played");
    if (t < 1) throw std::invalid_argument("ucb1_index: round must be >= 1");
    return arm.mean_reward +
           std::sqrt(2.0 * std::log(static_cast<double>(t)) / static_cast<double>(arm.plays));
}

double kl_ucb_index(const ArmState& arm, long long t, double tol) {
    if (arm.plays < 1) throw std::logic_error("kl_ucb_index: arm has never been played");
    if (t < 1) throw std::invalid_argument("kl_ucb_index: round must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("kl_ucb_index: tolerance must be > 0");
    const double mean = std::clamp(arm.mean_reward, 0.0, 1.0);
    if (mean >= 1.0) return 1.0;
    const double budget = std::log(static_cast<double>(t)) / static_cast<double>(arm.plays);

    // kl_bern(mean, q) grows monotonically in q on [mean, 1), so the largest
    // admissible q is the bisection fixpoint.
    double lo = mean;
    double hi = 1.0;
    while (hi - lo > tol) {
        const double mid = lo + (hi - lo) / 2.0;
        if (bernoulli_kl(mean, mid) <= budget) lo = mid;
        else hi = mid;
    }
    return lo;
}

double thompson_sample(const ArmState& arm, Rng& rng) {
    if (arm.wins + arm.losses != arm.plays) {
        throw std::logic_error("thompson_sample: wins + losses != plays");
    }
    // Beta(a, b) as the normalized quotient of two gamma draws.
    std::gamma_distribution<double> ga(1.0 + static_cast<double>(arm.wins), 1.0);
    std::gamma_distribution<double> gb(1.0 + static_cast<double>(arm.losses), 1.0);
    const double x = ga(rng);
    const double y = gb(rng);
    return x / (x + y);
}

double bayes_ucb_index(const ArmState& arm, long long t) {
    if (arm.wins + arm.losses != arm.plays) {
        throw std::logic_error("bayes_ucb_index: wins + losses != plays");
    }
    if (t < 1) throw std::invalid_argument("bayes_ucb_index: round must be >= 1");
    const double level = 1.0 - 1.0 / static_cast<double>(t);
    return beta_quantile(1.0 + static_cast<double>(arm.wins),
                         1.0 + static_cast<double>(arm.losses), level);
}

Eigen::VectorXd softmax_probabilities(const std::vector<ArmState>& arms, double temperature) {
    if (arms.empty()) throw std::invalid_argument("softmax_probabilities: no arms");
    if (!(temperature > 0.0)) {
        throw std::invalid_argument("softmax_probabilities: temperature must be > 0");
    }
    Eigen::VectorXd means(static_cast<Eigen::Index>(arms.size()));
    for (std::size_t i = 0; i < arms.size(); ++i) {
        if (arms[i].plays < 1) {
            throw std::logic_error("softmax_probabilities: arm " + std::to_string(i) +
                                   " has never been played");
        }
        means[static_cast<Eigen::Index>(i)] = arms[i].mean_reward;
    }
    const Eigen::ArrayXd shifted = (means.array() - means.maxCoeff()) / temperature;
    const Eigen::ArrayXd weights = shifted.exp();
    return (weights / weights.sum()).matrix();
}

namespace {

std::size_t argmax_lowest(const Eigen::VectorXd& values) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return static_cast<std::size_t>(best);
}

} // namespace

std::size_t select_arm(BanditPolicy& policy, const std::vector<ArmState>& arms, long long t,
                       Rng& rng) {
    if (arms.empty()) throw std::invalid_argument("select_arm: no arms");
    policy.validate();

    // Untested arms come first, whatever the policy.
    std::vector<std::size_t> unplayed;
    for (std::size_t i = 0; i < arms.size(); ++i) {
        if (arms[i].plays == 0) unplayed.push_back(i);
    }
    std::size_t chosen;
    if (!unplayed.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, unplayed.size() - 1);
        chosen = unplayed[pick(rng)];
        policy.last_arm = chosen;
        return chosen;
    }

    const auto n = static_cast<Eigen::Index>(arms.size());
    switch (policy.kind) {
        case PolicyKind::Ucb1:
        case PolicyKind::KlUcb:
        case PolicyKind::BayesUcb: {
            Eigen::VectorXd index(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                const ArmState& arm = arms[static_cast<std::size_t>(i)];
                if (policy.kind == PolicyKind::Ucb1) index[i] = ucb1_index(arm, t);
                else if (policy.kind == PolicyKind::KlUcb) index[i] = kl_ucb_index(arm, t, policy.kl_tolerance);
                else index[i] = bayes_ucb_index(arm, t);
            }
            chosen = argmax_lowest(index);
            break;
        }
        case PolicyKind::Thompson: {
            Eigen::VectorXd samples(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                samples[i] = thompson_sample(arms[static_cast<std::size_t>(i)], rng);
            }
            chosen = argmax_lowest(samples);
            break;
        }
        case PolicyKind::Softmax: {
            const Eigen::VectorXd p = softmax_probabilities(arms, policy.temperature);
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            const double u = unit(rng);
            double cumulative = 0.0;
            chosen = arms.size() - 1;  // guards against accumulated rounding
            for (Eigen::Index i = 0; i < n; ++i) {
                cumulative += p[i];
                if (u < cumulative) {
                    chosen = static_cast<std::size_t>(i);
                    break;
                }
            }
            break;
        }
        case PolicyKind::Wsls: {
            if (policy.last_arm && policy.last_won.value_or(false)) {
                chosen = *policy.last_arm;  // win-stay
            } else if (policy.last_arm && arms.size() > 1) {
                // lose-shift: uniform among the other arms
                std::uniform_int_distribution<std::size_t> pick(0, arms.size() - 2);
                std::size_t other = pick(rng);
                if (other >= *policy.last_arm) ++other;
                chosen = other;
            } else if (policy.last_arm) {
                chosen = *policy.last_arm;  // single arm: nowhere to shift
            } else {
                std::uniform_int_distribution<std::size_t> pick(0, arms.size() - 1);
                chosen = pick(rng);
            }
            break;
        }
        default:
            throw std::logic_error("select_arm: unknown policy kind");
    }
    policy.last_arm = chosen;
    return chosen;
}

void update_arm(ArmState& arm, double reward, bool win) {
    if (!(reward >= 0.0 && reward <= 1.0)) {
        throw std::invalid_argument("update_arm: reward must be in [0, 1]");
    }
    arm.plays += 1;
    const auto n = static_cast<double>(arm.plays);
    arm.mean_reward = ((n - 1.0) * arm.mean_reward + reward) / n;
    if (win) arm.wins += 1;
    else arm.losses += 1;
}

} // namespace mabprune
