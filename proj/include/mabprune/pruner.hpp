#pragma once

#include <cstdint>
#include <vector>

#include "mabprune/bandit.hpp"
#include "mabprune/dataset.hpp"
#include "mabprune/metrics.hpp"
#include "mabprune/tree.hpp"

namespace mabprune {

struct PruneConfig {
    long long rounds = 1100;
    // Candidates must sit strictly deeper than this (root = depth 0).
    int min_prune_depth = 3;
    double eval_fraction = 0.02;
    Eigen::Index eval_floor = 30;
    // When set, one evaluation subset is drawn up front and reused every
    // round instead of resampling.
    bool fixed_eval_subset = false;
    MetricWeights weights;
    RewardConfig reward;
    BanditPolicy policy;
    int positive_class = 1;
    std::uint64_t seed = 0;

    void validate() const;
};

/// One row of the post-run arm table, in ranked order (best prune first).
struct ArmRecord {
    NodeId node = kNoNode;
    long long plays = 0;
    double mean_reward = 0.0;
    long long wins = 0;
    long long losses = 0;
};

struct PruneOutcome {
    DecisionTree pruned_tree;
    // Nodes actually collapsed in the winning tree (empty when the unpruned
    // tree wins).
    std::vector<NodeId> pruned_node_ids;
    double best_performance = 0.0;
    std::vector<ArmRecord> arm_table;
    long long rounds_executed = 0;
    // Winning cut position in the ranking; 0 means the unpruned tree won.
    std::size_t chosen_cut = 0;
};

/// All internal nodes deeper than min_depth, in preorder.
std::vector<NodeId> find_prunable(const DecisionTree& tree, int min_depth);

/// The bandit pruning procedure. Trial phase: every round draws an
/// evaluation subset, scores the intact tree on it, trial-prunes the selected
/// arm, scores again on the same subset, rewards the arm with the score
/// change, and restores. Selection phase: arms ranked by mean reward
/// (descending; ties by more plays, then lower NodeId); each cumulative
/// prefix is pruned onto a clone and scored on the full training set; the
/// best prefix wins, with ties preferring more pruning. The unpruned tree
/// competes with its own training performance and wins when every prefix
/// scores worse.
PruneOutcome mab_prune(const DecisionTree& tree, const Dataset& train, const PruneConfig& cfg);

/// Clone of tree with the first c ranked nodes pruned. A node whose ancestor
/// was already pruned is skipped but still consumes its rank slot.
DecisionTree apply_cumulative(const DecisionTree& tree, const std::vector<NodeId>& ranked_nodes,
                              std::size_t c);

} // namespace mabprune
