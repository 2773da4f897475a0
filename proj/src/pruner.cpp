#include "mabprune/pruner.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace mabprune {

void PruneConfig::validate() const {
    if (rounds < 1) throw std::invalid_argument("PruneConfig: rounds must be >= 1");
    if (min_prune_depth < 0) throw std::invalid_argument("PruneConfig: min_prune_depth must be >= 0");
    if (!(eval_fraction > 0.0 && eval_fraction <= 1.0)) {
        throw std::invalid_argument("PruneConfig: eval_fraction must be in (0, 1]");
    }
    if (eval_floor < 1) throw std::invalid_argument("PruneConfig: eval_floor must be >= 1");
    reward.validate();
    policy.validate();
}

std::vector<NodeId> find_prunable(const DecisionTree& tree, int min_depth) {
    std::vector<NodeId> out;
    for (const auto& [id, depth] : tree.internal_nodes()) {
        if (depth > min_depth) out.push_back(id);
    }
    return out;
}

namespace {

// Prunes the first c ranked nodes onto `work`, skipping nodes that an earlier
// prune already removed; returns the ids actually collapsed.
std::vector<NodeId> prune_prefix(DecisionTree& work, const std::vector<NodeId>& ranked_nodes,
                                 std::size_t c) {
    std::vector<NodeId> pruned;
    std::unordered_set<NodeId> gone;
    for (std::size_t i = 0; i < c; ++i) {
        const NodeId id = ranked_nodes[i];
        if (gone.count(id)) continue;  // an ancestor already took this subtree
        for (NodeId sub : work.subtree_node_ids(id)) {
            if (sub != id) gone.insert(sub);
        }
        work.prune_branch_permanently(id);
        pruned.push_back(id);
    }
    return pruned;
}

} // namespace

DecisionTree apply_cumulative(const DecisionTree& tree, const std::vector<NodeId>& ranked_nodes,
                              std::size_t c) {
    if (c < 1 || c > ranked_nodes.size()) {
        throw std::invalid_argument("apply_cumulative: c out of range [1, " +
                                    std::to_string(ranked_nodes.size()) + "]");
    }
    DecisionTree work = tree.clone();
    prune_prefix(work, ranked_nodes, c);
    return work;
}

PruneOutcome mab_prune(const DecisionTree& tree, const Dataset& train, const PruneConfig& cfg) {
    cfg.validate();
    if (train.n_rows() == 0) throw std::invalid_argument("mab_prune: empty training data");
    if (train.n_features() != tree.n_features()) {
        throw std::invalid_argument("mab_prune: training data does not match the tree's schema");
    }

    const std::vector<NodeId> candidates = find_prunable(tree, cfg.min_prune_depth);
    const EvalResult unpruned_eval = evaluate(tree, train, cfg.positive_class);
    const double unpruned_performance = performance(unpruned_eval, cfg.weights);

    if (candidates.empty()) {
        PruneOutcome out{tree.clone(), {}, unpruned_performance, {}, 0, 0};
        return out;
    }

    DecisionTree work = tree.clone();
    const std::string intact = serialize_tree(work);

    std::vector<ArmState> arms(candidates.size());
    BanditPolicy policy = cfg.policy;
    policy.last_arm.reset();
    policy.last_won.reset();
    const RewardKind rkind = reward_kind(policy.kind);

    Rng subset_rng = make_rng(cfg.seed, 0);
    Rng policy_rng = make_rng(cfg.seed, 1);

    Dataset fixed_subset;
    if (cfg.fixed_eval_subset) {
        fixed_subset = sample_subset(train, cfg.eval_fraction, cfg.eval_floor, subset_rng);
    }

    Dataset round_subset;
    for (long long t = 1; t <= cfg.rounds; ++t) {
        if (!cfg.fixed_eval_subset) {
            round_subset = sample_subset(train, cfg.eval_fraction, cfg.eval_floor, subset_rng);
        }
        const Dataset& subset = cfg.fixed_eval_subset ? fixed_subset : round_subset;
        // Score change is paired: the intact tree and the trial prune see the
        // same rows, so the delta isolates the prune's effect.
        const EvalResult base = evaluate(work, subset, cfg.positive_class);
        const std::size_t idx = select_arm(policy, arms, t, policy_rng);
        PruneToken token = work.prune_branch(candidates[idx]);
        const EvalResult after = evaluate(work, subset, cfg.positive_class);
        work.restore(token);

        const double delta = delta_score(base, after, cfg.weights);
        const bool win = delta > 0.0;
        const double reward = rkind == RewardKind::Bernoulli ? bernoulli_reward(delta)
                                                             : continuous_reward(delta, cfg.reward);
        update_arm(arms[idx], reward, win);
        policy.last_won = win;
    }

    if (serialize_tree(work) != intact) {
        throw std::logic_error("mab_prune: working tree diverged from the fitted tree "
                               "(prune/restore discipline broken)");
    }

    // Rank arms: best mean reward first; more plays, then lower NodeId on ties.
    std::vector<std::size_t> order(arms.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (arms[a].mean_reward != arms[b].mean_reward) {
            return arms[a].mean_reward > arms[b].mean_reward;
        }
        if (arms[a].plays != arms[b].plays) return arms[a].plays > arms[b].plays;
        return candidates[a] < candidates[b];
    });

    std::vector<NodeId> ranked_nodes(order.size());
    std::vector<ArmRecord> arm_table(order.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
        const std::size_t i = order[r];
        ranked_nodes[r] = candidates[i];
        arm_table[r] = ArmRecord{candidates[i], arms[i].plays, arms[i].mean_reward, arms[i].wins,
                                 arms[i].losses};
    }

    // Cumulative selection on the full training set. The unpruned tree opens
    // as the incumbent; >= lets equal scores switch to the more-pruned tree.
    PruneOutcome out{tree.clone(), {}, unpruned_performance, std::move(arm_table), cfg.rounds, 0};
    for (std::size_t c = 1; c <= ranked_nodes.size(); ++c) {
        DecisionTree candidate_tree = tree.clone();
        std::vector<NodeId> pruned = prune_prefix(candidate_tree, ranked_nodes, c);
        const double score = performance(evaluate(candidate_tree, train, cfg.positive_class),
                                         cfg.weights);
        if (score >= out.best_performance) {
            out.pruned_tree = std::move(candidate_tree);
            out.pruned_node_ids = std::move(pruned);
            out.best_performance = score;
            out.chosen_cut = c;
        }
    }
    return out;
}

} // namespace mabprune
