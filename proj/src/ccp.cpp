#include "mabprune/ccp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace mabprune {

namespace {

constexpr double kAlphaTol = 1e-12;

double leaf_risk(const Node& nd, double n_total) {
    return (nd.class_counts.sum() - nd.class_counts.maxCoeff()) / n_total;
}

struct SubtreeStats {
    double risk = 0.0;        // summed leaf risks
    Eigen::Index leaves = 0;
};

} // namespace

std::vector<CcpPathEntry> ccp_path(const DecisionTree& tree, const Dataset& train) {
    if (train.n_features() != tree.n_features()) {
        throw std::invalid_argument("ccp_path: training data does not match the tree's schema");
    }
    DecisionTree work = tree.clone();
    const double n_total = work.node(work.root()).class_counts.sum();

    std::vector<CcpPathEntry> path;
    path.push_back({0.0, work.leaf_count(), {}});
    std::vector<NodeId> cumulative;

    while (!work.node(work.root()).is_leaf()) {
        // Post-order accumulation of (risk, leaves) per reachable node;
        // reversed preorder visits children before their parent.
        const std::vector<NodeId> preorder = work.subtree_node_ids(work.root());
        std::unordered_map<NodeId, SubtreeStats> stats;
        stats.reserve(preorder.size());
        double g_min = std::numeric_limits<double>::infinity();
        for (auto it = preorder.rbegin(); it != preorder.rend(); ++it) {
            const Node& nd = work.node(*it);
            SubtreeStats s;
            if (nd.is_leaf()) {
                s.risk = leaf_risk(nd, n_total);
                s.leaves = 1;
            } else {
                const SubtreeStats& l = stats.at(nd.left);
                const SubtreeStats& r = stats.at(nd.right);
                s.risk = l.risk + r.risk;
                s.leaves = l.leaves + r.leaves;
                const double g = (leaf_risk(nd, n_total) - s.risk) /
                                 static_cast<double>(s.leaves - 1);
                g_min = std::min(g_min, g);
            }
            stats.emplace(*it, s);
        }

        // Collapse every weakest link; preorder so an ancestor's prune
        // silently absorbs nested ties.
        for (NodeId id : preorder) {
            if (!work.is_reachable(id)) continue;
            const Node& nd = work.node(id);
            if (nd.is_leaf()) continue;
            const SubtreeStats& s = stats.at(id);
            const double g = (leaf_risk(nd, n_total) - s.risk) /
                             static_cast<double>(s.leaves - 1);
            if (g <= g_min + kAlphaTol) {
                work.prune_branch_permanently(id);
                cumulative.push_back(id);
            }
        }

        // Weakest-link alphas are theoretically nondecreasing; guard against
        // rounding noise. Steps landing on the previous entry's alpha merge
        // into it, so each recorded alpha maps to the smallest subtree that
        // is optimal there (zero-g collapses merge into the alpha-0 entry).
        const double alpha = std::max(g_min, path.back().alpha);
        if (alpha - path.back().alpha <= kAlphaTol) {
            path.back().n_leaves = work.leaf_count();
            path.back().pruned_node_ids = cumulative;
        } else {
            path.push_back({alpha, work.leaf_count(), cumulative});
        }
    }
    return path;
}

DecisionTree prune_at_alpha(const DecisionTree& tree, const std::vector<CcpPathEntry>& path,
                            double alpha) {
    if (path.empty()) throw std::invalid_argument("prune_at_alpha: empty path");
    if (alpha < 0.0) throw std::invalid_argument("prune_at_alpha: alpha must be >= 0");
    const CcpPathEntry* chosen = nullptr;
    for (const CcpPathEntry& entry : path) {
        if (entry.alpha <= alpha) chosen = &entry;
    }
    if (chosen == nullptr) chosen = &path.front();
    DecisionTree work = tree.clone();
    for (NodeId id : chosen->pruned_node_ids) work.prune_branch_permanently(id);
    return work;
}

CcpOutcome ccp_prune_detailed(const DecisionTree& tree, const Dataset& train, int folds,
                              const MetricWeights& weights, std::uint64_t seed,
                              int positive_class) {
    if (folds < 2) throw std::invalid_argument("ccp_prune: folds must be >= 2");
    train.validate();

    std::vector<std::vector<Eigen::Index>> by_class(static_cast<std::size_t>(train.n_classes));
    for (Eigen::Index i = 0; i < train.n_rows(); ++i) {
        by_class[static_cast<std::size_t>(train.labels[i])].push_back(i);
    }
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        if (static_cast<int>(by_class[c].size()) < folds) {
            throw std::invalid_argument("ccp_prune: class " + std::to_string(c) + " has " +
                                        std::to_string(by_class[c].size()) +
                                        " samples, fewer than " + std::to_string(folds) +
                                        " folds");
        }
    }

    CcpOutcome out{tree.clone(), 0.0, ccp_path(tree, train), {}};

    std::vector<double> alphas;
    for (std::size_t i = 0; i + 1 < out.path.size(); ++i) {
        alphas.push_back((out.path[i].alpha + out.path[i + 1].alpha) / 2.0);
    }
    alphas.push_back(out.path.back().alpha);  // keeps the terminal stump in play

    // Stratified folds: shuffle within each class, then deal round-robin.
    Rng rng = make_rng(seed, 0);
    std::vector<std::vector<Eigen::Index>> fold_members(static_cast<std::size_t>(folds));
    for (auto& idx : by_class) {
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t k = 0; k < idx.size(); ++k) {
            fold_members[k % static_cast<std::size_t>(folds)].push_back(idx[k]);
        }
    }

    std::vector<double> fold_mean(alphas.size(), 0.0);
    for (int f = 0; f < folds; ++f) {
        std::vector<Eigen::Index> cv_test = fold_members[static_cast<std::size_t>(f)];
        std::vector<Eigen::Index> cv_train;
        for (int g = 0; g < folds; ++g) {
            if (g == f) continue;
            const auto& members = fold_members[static_cast<std::size_t>(g)];
            cv_train.insert(cv_train.end(), members.begin(), members.end());
        }
        std::sort(cv_train.begin(), cv_train.end());
        std::sort(cv_test.begin(), cv_test.end());

        const Dataset train_fold = train.select_rows(cv_train);
        const Dataset test_fold = train.select_rows(cv_test);
        const DecisionTree fold_tree = fit(train_fold, tree.hyperparams());
        const std::vector<CcpPathEntry> fold_path = ccp_path(fold_tree, train_fold);
        for (std::size_t a = 0; a < alphas.size(); ++a) {
            const DecisionTree pruned = prune_at_alpha(fold_tree, fold_path, alphas[a]);
            fold_mean[a] += performance(evaluate(pruned, test_fold, positive_class), weights);
        }
    }

    double best_score = -std::numeric_limits<double>::infinity();
    double best_alpha = 0.0;
    for (std::size_t a = 0; a < alphas.size(); ++a) {
        const double mean_score = fold_mean[a] / static_cast<double>(folds);
        out.cv_scores.emplace_back(alphas[a], mean_score);
        if (mean_score >= best_score) {  // ascending alphas: ties pick the simpler tree
            best_score = mean_score;
            best_alpha = alphas[a];
        }
    }

    out.chosen_alpha = best_alpha;
    out.pruned_tree = prune_at_alpha(tree, out.path, best_alpha);
    return out;
}

DecisionTree ccp_prune(const DecisionTree& tree, const Dataset& train, int folds,
                       const MetricWeights& weights, std::uint64_t seed, int positive_class) {
    return ccp_prune_detailed(tree, train, folds, weights, seed, positive_class).pruned_tree;
}

} // namespace mabprune
