#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mabprune/dataset.hpp"
#include "mabprune/metrics.hpp"
#include "mabprune/tree.hpp"

namespace mabprune {

/// One step of the weakest-link path. pruned_node_ids is cumulative: pruning
/// those nodes (in order) onto a clone of the full tree reproduces the tree
/// at this alpha.
struct CcpPathEntry {
    double alpha = 0.0;
    Eigen::Index n_leaves = 0;
    std::vector<NodeId> pruned_node_ids;
};

/// Weakest-link pruning sequence. Entry 0 is the unpruned tree at alpha 0;
/// the final entry is the root stump. Alphas strictly increase and leaf
/// counts strictly decrease. Each iteration collapses every internal node
/// whose effective alpha g(t) = (R(t) - R(T_t)) / (|leaves(T_t)| - 1) ties
/// the minimum, where R is training misclassification error weighted by
/// sample fraction (taken from the stored class counts).
std::vector<CcpPathEntry> ccp_path(const DecisionTree& tree, const Dataset& train);

/// Tree of the last path entry whose alpha does not exceed the given alpha.
DecisionTree prune_at_alpha(const DecisionTree& tree, const std::vector<CcpPathEntry>& path,
                            double alpha);

struct CcpOutcome {
    DecisionTree pruned_tree;
    double chosen_alpha = 0.0;
    std::vector<CcpPathEntry> path;
    // (candidate alpha, mean cross-validated composite performance)
    std::vector<std::pair<double, double>> cv_scores;
};

/// Cost-complexity pruning with the penalty chosen by stratified k-fold
/// cross-validation of the composite performance. Candidate alphas are the
/// midpoints of consecutive path alphas plus the terminal alpha (so the root
/// stump stays reachable); ties prefer the larger alpha, i.e. the simpler
/// tree.
CcpOutcome ccp_prune_detailed(const DecisionTree& tree, const Dataset& train, int folds,
                              const MetricWeights& weights, std::uint64_t seed,
                              int positive_class = 1);

DecisionTree ccp_prune(const DecisionTree& tree, const Dataset& train, int folds,
                       const MetricWeights& weights, std::uint64_t seed, int positive_class = 1);

} // namespace mabprune
