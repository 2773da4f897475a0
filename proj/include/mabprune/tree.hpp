#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "mabprune/dataset.hpp"

namespace mabprune {

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

struct TreeHyperparams {
    int max_depth = 7;
    int min_samples_leaf = 3;
    int min_samples_split = 3;
};

struct Node {
    int depth = 0;
    NodeId parent = kNoNode;
    NodeId left = kNoNode;
    NodeId right = kNoNode;
    int feature = -1;        // valid only for split nodes
    double threshold = 0.0;  // go left iff value <= threshold
    Eigen::VectorXd class_counts;

    bool is_leaf() const { return left == kNoNode; }
};

class DecisionTree;

/// Receipt for one prune_branch call; feeding it back to restore undoes the
/// prune. Single-use, and bound to the tree that issued it.
class PruneToken {
  public:
    PruneToken(PruneToken&&) noexcept = default;
    PruneToken& operator=(PruneToken&&) noexcept = default;
    PruneToken(const PruneToken&) = delete;
    PruneToken& operator=(const PruneToken&) = delete;

    NodeId node() const { return node_; }

  private:
    friend class DecisionTree;
    PruneToken(std::uint64_t tag, NodeId node, NodeId left, NodeId right)
        : tree_tag_(tag), node_(node), saved_left_(left), saved_right_(right) {}

    std::uint64_t tree_tag_ = 0;
    NodeId node_ = kNoNode;
    NodeId saved_left_ = kNoNode;
    NodeId saved_right_ = kNoNode;
    bool used_ = false;
};

/// Binary classification tree over an arena of nodes. NodeIds are stable
/// across prune/restore and across clone(), so callers can address the same
/// branch in a clone. Mutation is limited to prune_branch/restore; confine a
/// tree to one thread at a time and clone for parallel work.
class DecisionTree {
  public:
    DecisionTree(const DecisionTree&) = delete;
    DecisionTree& operator=(const DecisionTree&) = delete;
    DecisionTree(DecisionTree&&) noexcept = default;
    DecisionTree& operator=(DecisionTree&&) noexcept = default;

    /// Independent copy with identical structure and NodeIds (fresh token tag).
    DecisionTree clone() const;

    int n_classes() const { return n_classes_; }
    Eigen::Index n_features() const { return n_features_; }
    const TreeHyperparams& hyperparams() const { return hp_; }
    NodeId root() const { return root_; }
    const Node& node(NodeId id) const;

    /// Distribution of the leaf reached by the row (normalized class_counts).
    Eigen::VectorXd predict_proba(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
    /// Argmax class; ties go to the lower class index.
    int predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;

    Eigen::MatrixXd predict_proba_all(const FeatureMatrix& rows) const;
    Eigen::VectorXi predict_all(const FeatureMatrix& rows) const;

    /// Turns an internal node into a leaf (its subtree detaches into the
    /// token). The node keeps its class_counts, so the new leaf predicts the
    /// training distribution that reached it.
    PruneToken prune_branch(NodeId id);
    /// Reattaches the subtree saved in the token. Errors on a reused token or
    /// one issued by a different tree.
    void restore(PruneToken& token);
    /// Prune with no receipt (no restore possible); used by permanent passes.
    void prune_branch_permanently(NodeId id);

    /// Preorder (NodeId, depth) of all internal nodes.
    std::vector<std::pair<NodeId, int>> internal_nodes() const;
    /// Preorder ids of the subtree rooted at id, id included.
    std::vector<NodeId> subtree_node_ids(NodeId id) const;
    bool is_reachable(NodeId id) const;

    Eigen::Index node_count() const;  // reachable nodes only
    Eigen::Index leaf_count() const;
    int max_depth() const;

  private:
    DecisionTree() = default;
    friend DecisionTree fit(const Dataset& train, const TreeHyperparams& hp, std::uint64_t seed);
    friend DecisionTree deserialize_tree(std::istream& in);

    NodeId leaf_for(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
    void check_node(NodeId id) const;

    std::vector<Node> nodes_;
    NodeId root_ = kNoNode;
    int n_classes_ = 0;
    Eigen::Index n_features_ = 0;
    TreeHyperparams hp_;
    std::uint64_t tag_ = 0;  // identifies this object for token validation
};

/// Greedy CART induction: Gini impurity, exhaustive midpoint-threshold
/// search, ties broken toward (lower feature index, lower threshold). The
/// procedure is deterministic; seed is accepted for interface uniformity.
DecisionTree fit(const Dataset& train, const TreeHyperparams& hp, std::uint64_t seed = 0);

/// Canonical text form: nodes renumbered in preorder, so two structurally
/// equal trees serialize identically regardless of arena history.
std::string serialize_tree(const DecisionTree& tree);
void serialize_tree(const DecisionTree& tree, std::ostream& out);
DecisionTree deserialize_tree(std::istream& in);
DecisionTree deserialize_tree(const std::string& text);

} // namespace mabprune
