#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "mabprune/dataset.hpp"
#include "mabprune/tree.hpp"

using namespace mabprune;

namespace {

Dataset column_dataset(const std::vector<double>& values, const std::vector<int>& labels) {
    Dataset d;
    d.features.resize(Eigen::Index(values.size()), 1);
    d.labels.resize(Eigen::Index(labels.size()));
    for (std::size_t i = 0; i < values.size(); ++i) {
        d.features(Eigen::Index(i), 0) = values[i];
        d.labels[Eigen::Index(i)] = labels[i];
    }
    d.n_classes = 2;
    return d;
}

int predict1(const DecisionTree& tree, double x) {
    Eigen::RowVectorXd row(1);
    row[0] = x;
    return tree.predict(row);
}

// Alternating labels over 1..4 grow a three-split chain whose geometry is
// easy to verify by hand.
const char* kChainText =
    "tree 1\n"
    "classes 2\n"
    "features 1\n"
    "params 8 1 2\n"
    "nodes 7\n"
    "0 0 split 0 1.5 1 2 counts 2 2\n"
    "1 1 leaf counts 1 0\n"
    "2 1 split 0 2.5 3 4 counts 1 2\n"
    "3 2 leaf counts 0 1\n"
    "4 2 split 0 3.5 5 6 counts 1 1\n"
    "5 3 leaf counts 1 0\n"
    "6 3 leaf counts 0 1\n";

} // namespace

TEST_SUITE("tree") {

TEST_CASE("fit reproduces the hand-derived chain tree") {
    Dataset d = column_dataset({1, 2, 3, 4}, {0, 1, 0, 1});
    DecisionTree tree = fit(d, TreeHyperparams{8, 1, 2});
    // The 1.5 and 3.5 cuts tie on gain; the lower threshold must win at the
    // root, and the same rule recurses down the right spine.
    CHECK(serialize_tree(tree) == kChainText);
    CHECK(tree.node_count() == 7);
    CHECK(tree.leaf_count() == 4);
    CHECK(tree.max_depth() == 3);
    CHECK(predict1(tree, 1) == 0);
    CHECK(predict1(tree, 2) == 1);
    CHECK(predict1(tree, 3) == 0);
    CHECK(predict1(tree, 4) == 1);
}

TEST_CASE("fit splits between the two classes of a separable column") {
    Dataset d = column_dataset({1, 2, 3, 4}, {0, 0, 1, 1});
    DecisionTree tree = fit(d, TreeHyperparams{3, 1, 2});
    const Node& root = tree.node(tree.root());
    CHECK_FALSE(root.is_leaf());
    CHECK(root.feature == 0);
    CHECK(root.threshold == 2.5);
    CHECK(tree.node_count() == 3);
    CHECK(tree.node(root.left).class_counts == Eigen::Vector2d(2, 0));
    CHECK(tree.node(root.right).class_counts == Eigen::Vector2d(0, 2));
}

TEST_CASE("fit prefers the lower feature index on exact gain ties") {
    Dataset d = column_dataset({1, 2, 3, 4}, {0, 0, 1, 1});
    Dataset two = d;
    two.features.resize(4, 2);
    two.features.col(0) = d.features.col(0);
    two.features.col(1) = d.features.col(0);  // identical twin column
    two.feature_names.clear();
    DecisionTree tree = fit(two, TreeHyperparams{3, 1, 2});
    CHECK(tree.node(tree.root()).feature == 0);
}

TEST_CASE("fit stopping rules") {
    SUBCASE("pure node becomes a leaf") {
        Dataset d = column_dataset({1, 2, 3}, {1, 1, 1});
        DecisionTree tree = fit(d, TreeHyperparams{5, 1, 2});
        CHECK(tree.node_count() == 1);
        CHECK(predict1(tree, 42) == 1);
    }
    SUBCASE("max_depth caps growth") {
        Dataset d = column_dataset({1, 2, 3, 4}, {0, 1, 0, 1});
        DecisionTree tree = fit(d, TreeHyperparams{1, 1, 2});
        CHECK(tree.max_depth() == 1);
        CHECK(tree.node_count() == 3);
    }
    SUBCASE("min_samples_leaf filters candidate cuts") {
        Dataset d = column_dataset({1, 2, 3, 4}, {0, 0, 1, 1});
        DecisionTree balanced = fit(d, TreeHyperparams{3, 2, 2});
        CHECK(balanced.node(balanced.root()).threshold == 2.5);
        DecisionTree stump = fit(d, TreeHyperparams{3, 3, 2});
        CHECK(stump.node_count() == 1);  // no cut leaves 3 on both sides
    }
    SUBCASE("min_samples_split stops small nodes") {
        Dataset d = column_dataset({1, 2, 3, 4}, {0, 0, 1, 1});
        DecisionTree tree = fit(d, TreeHyperparams{3, 1, 5});
        CHECK(tree.node_count() == 1);
    }
    SUBCASE("constant feature offers no cut") {
        Dataset d = column_dataset({7, 7, 7, 7}, {0, 1, 0, 1});
        DecisionTree tree = fit(d, TreeHyperparams{3, 1, 2});
        CHECK(tree.node_count() == 1);
    }
}

TEST_CASE("fit keeps thresholds strictly inside adjacent representable values") {
    const double lo = 1.0;
    const double hi = std::nextafter(lo, 2.0);
    Dataset d = column_dataset({lo, hi}, {0, 1});
    DecisionTree tree = fit(d, TreeHyperparams{2, 1, 2});
    const Node& root = tree.node(tree.root());
    REQUIRE_FALSE(root.is_leaf());
    // The exact midpoint rounds back onto lo, so the threshold must fall back
    // to lo itself for <= routing to reproduce the training partition.
    CHECK(root.threshold == lo);
    CHECK(predict1(tree, lo) == 0);
    CHECK(predict1(tree, hi) == 1);
}

TEST_CASE("fit argument validation") {
    Dataset empty;
    empty.features.resize(0, 1);
    empty.labels.resize(0);
    empty.n_classes = 2;
    CHECK_THROWS_AS(fit(empty, TreeHyperparams{}), std::invalid_argument);

    Dataset d = column_dataset({1, 2}, {0, 1});
    CHECK_THROWS_AS(fit(d, TreeHyperparams{0, 1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(fit(d, TreeHyperparams{3, 0, 2}), std::invalid_argument);
    CHECK_THROWS_AS(fit(d, TreeHyperparams{3, 1, 1}), std::invalid_argument);
}

TEST_CASE("predict_proba normalizes leaf counts; ties go to the lower class") {
    DecisionTree tree = deserialize_tree(
        "tree 1\nclasses 3\nfeatures 1\nparams 5 1 2\nnodes 1\n0 0 leaf counts 2 2 1\n");
    Eigen::RowVectorXd row(1);
    row[0] = 0.0;
    Eigen::VectorXd p = tree.predict_proba(row);
    CHECK(p[0] == doctest::Approx(0.4));
    CHECK(p[1] == doctest::Approx(0.4));
    CHECK(p[2] == doctest::Approx(0.2));
    CHECK(tree.predict(row) == 0);

    Eigen::RowVectorXd bad(2);
    CHECK_THROWS_AS(tree.predict(bad), std::invalid_argument);
}

TEST_CASE("predict_all and predict_proba_all match the row-wise calls") {
    Dataset d = column_dataset({1, 2, 3, 4}, {0, 1, 0, 1});
    DecisionTree tree = fit(d, TreeHyperparams{8, 1, 2});
    Eigen::VectorXi preds = tree.predict_all(d.features);
    Eigen::MatrixXd probs = tree.predict_proba_all(d.features);
    REQUIRE(preds.size() == 4);
    REQUIRE(probs.rows() == 4);
    for (Eigen::Index i = 0; i < 4; ++i) {
        CHECK(preds[i] == tree.predict(d.features.row(i)));
        CHECK(probs.row(i).transpose() == tree.predict_proba(d.features.row(i)));
    }
}

TEST_CASE("prune_branch collapses a subtree and restore undoes it exactly") {
    DecisionTree tree = deserialize_tree(kChainText);
    const std::string before = serialize_tree(tree);

    // The depth-1 internal node on the right spine.
    NodeId mid = kNoNode;
    for (auto [id, depth] : tree.internal_nodes())
        if (depth == 1) mid = id;
    REQUIRE(mid != kNoNode);

    PruneToken token = tree.prune_branch(mid);
    CHECK(token.node() == mid);
    CHECK(tree.node_count() == 3);
    CHECK(tree.node(mid).is_leaf());
    // New leaf predicts with the training counts that reached it ([1, 2]).
    CHECK(predict1(tree, 2) == 1);
    CHECK(predict1(tree, 3) == 1);
    CHECK(predict1(tree, 1) == 0);
    // Detached descendants are no longer reachable but keep their ids.
    CHECK_FALSE(tree.is_reachable(token.node() + 1));

    tree.restore(token);
    CHECK(serialize_tree(tree) == before);
    CHECK(predict1(tree, 3) == 0);
}

TEST_CASE("repeated prune/restore is an exact identity") {
    Dataset d = column_dataset({1, 2, 3, 4, 5, 6, 7, 8}, {0, 1, 0, 1, 1, 0, 1, 0});
    DecisionTree tree = fit(d, TreeHyperparams{6, 1, 2});
    const std::string before = serialize_tree(tree);
    auto internals = tree.internal_nodes();
    REQUIRE(internals.size() > 1);
    for (int cycle = 0; cycle < 100; ++cycle) {
        auto [id, depth] = internals[std::size_t(cycle) % internals.size()];
        PruneToken token = tree.prune_branch(id);
        tree.restore(token);
    }
    CHECK(serialize_tree(tree) == before);
}

TEST_CASE("prune token misuse is rejected") {
    DecisionTree tree = deserialize_tree(kChainText);

    SUBCASE("leaf and unknown-node arguments") {
        CHECK_THROWS_WITH_AS(tree.prune_branch(1), doctest::Contains("already a leaf"),
                             std::invalid_argument);
        CHECK_THROWS_AS(tree.prune_branch(99), std::invalid_argument);
        CHECK_THROWS_AS(tree.node(kNoNode), std::invalid_argument);
    }
    SUBCASE("pruning inside a detached subtree") {
        PruneToken root_token = tree.prune_branch(tree.root());
        CHECK_THROWS_WITH_AS(tree.prune_branch(2), doctest::Contains("detached"),
                             std::invalid_argument);
        tree.restore(root_token);
    }
    SUBCASE("token reuse") {
        PruneToken token = tree.prune_branch(2);
        tree.restore(token);
        CHECK_THROWS_WITH_AS(tree.restore(token), doctest::Contains("already used"),
                             std::logic_error);
    }
    SUBCASE("token from another tree") {
        DecisionTree other = tree.clone();
        PruneToken token = other.prune_branch(2);
        CHECK_THROWS_WITH_AS(tree.restore(token), doctest::Contains("different tree"),
                             std::logic_error);
        other.restore(token);
    }
}

TEST_CASE("prune_branch_permanently leaves no way back") {
    DecisionTree tree = deserialize_tree(kChainText);
    tree.prune_branch_permanently(2);
    CHECK(tree.node_count() == 3);
    CHECK(tree.node(2).is_leaf());
    // Canonical serialization forgets the detached arena entries.
    DecisionTree reread = deserialize_tree(serialize_tree(tree));
    CHECK(reread.node_count() == 3);
}

TEST_CASE("clone shares structure but not mutations") {
    DecisionTree tree = deserialize_tree(kChainText);
    DecisionTree copy = tree.clone();
    CHECK(serialize_tree(copy) == serialize_tree(tree));
    PruneToken token = copy.prune_branch(2);
    CHECK(copy.node_count() == 3);
    CHECK(tree.node_count() == 7);  // original untouched
    copy.restore(token);
}

TEST_CASE("internal_nodes and subtree_node_ids walk preorder") {
    DecisionTree tree = deserialize_tree(kChainText);
    auto internals = tree.internal_nodes();
    REQUIRE(internals.size() == 3);
    CHECK(internals[0] == std::pair<NodeId, int>{0, 0});
    CHECK(internals[1] == std::pair<NodeId, int>{2, 1});
    CHECK(internals[2] == std::pair<NodeId, int>{4, 2});

    CHECK(tree.subtree_node_ids(4) == std::vector<NodeId>{4, 5, 6});
    CHECK(tree.subtree_node_ids(tree.root()).size() == 7);
    PruneToken token = tree.prune_branch(4);
    CHECK(tree.subtree_node_ids(4) == std::vector<NodeId>{4});
    tree.restore(token);
}

TEST_CASE("serialization round-trips and renumbers canonically") {
    Dataset d = column_dataset({1, 2, 3, 4, 5, 6}, {0, 1, 1, 0, 1, 0});
    DecisionTree tree = fit(d, TreeHyperparams{4, 1, 2});
    const std::string text = serialize_tree(tree);
    DecisionTree back = deserialize_tree(text);
    CHECK(serialize_tree(back) == text);
    CHECK(back.n_classes() == tree.n_classes());
    CHECK(back.n_features() == tree.n_features());
    CHECK(back.hyperparams().max_depth == tree.hyperparams().max_depth);

    // A pruned tree serializes as if the detached nodes never existed, so a
    // fresh fit of the collapsed structure would read identically.
    auto internals = tree.internal_nodes();
    tree.prune_branch_permanently(internals.back().first);
    const std::string pruned_text = serialize_tree(tree);
    CHECK(serialize_tree(deserialize_tree(pruned_text)) == pruned_text);
}

TEST_CASE("deserialize_tree validates structure") {
    auto corrupt = [](std::string text, const std::string& from, const std::string& to) {
        const auto at = text.find(from);
        REQUIRE(at != std::string::npos);
        return text.replace(at, from.size(), to);
    };
    const std::string good = kChainText;
    CHECK_NOTHROW(deserialize_tree(good));

    CHECK_THROWS_WITH_AS(deserialize_tree(corrupt(good, "tree 1", "tree 2")),
                         doctest::Contains("bad format line"), std::runtime_error);
    CHECK_THROWS_WITH_AS(deserialize_tree(corrupt(good, "1 1 leaf", "5 1 leaf")),
                         doctest::Contains("sequential preorder"), std::runtime_error);
    CHECK_THROWS_WITH_AS(deserialize_tree(corrupt(good, "1 1 leaf", "1 2 leaf")),
                         doctest::Contains("child depth"), std::runtime_error);
    CHECK_THROWS_WITH_AS(deserialize_tree(corrupt(good, "counts 2 2", "counts 3 2")),
                         doctest::Contains("sum of its children"), std::runtime_error);
    CHECK_THROWS_WITH_AS(deserialize_tree(corrupt(good, "counts 1 0\n2", "counts -1 0\n2")),
                         doctest::Contains("negative class count"), std::runtime_error);
    CHECK_THROWS_WITH_AS(deserialize_tree(corrupt(good, "counts 1 0\n2", "counts 0 0\n2")),
                         doctest::Contains("zero total count"), std::runtime_error);
    CHECK_THROWS_WITH_AS(deserialize_tree(corrupt(good, "split 0 1.5 1 2", "split 7 1.5 1 2")),
                         doctest::Contains("feature index out of range"), std::runtime_error);
    CHECK_THROWS_WITH_AS(deserialize_tree(corrupt(good, "split 0 1.5 1 2", "split 0 1.5 0 2")),
                         doctest::Contains("point forward"), std::runtime_error);
    CHECK_THROWS_WITH_AS(deserialize_tree(std::string("tree 1\nclasses 2\n")),
                         doctest::Contains("unexpected end of input"), std::runtime_error);
    CHECK_THROWS_WITH_AS(deserialize_tree(corrupt(good, "nodes 7", "nodes 8")),
                         doctest::Contains("unexpected end of input"), std::runtime_error);
}

} // TEST_SUITE
