#include "mabprune/tree.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mabprune/csv.hpp"

namespace mabprune {

namespace {

std::uint64_t next_tree_tag() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1);
}

double gini(const Eigen::VectorXd& counts, double n) {
    double sum_sq = 0.0;
    for (Eigen::Index c = 0; c < counts.size(); ++c) {
        const double p = counts[c] / n;
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

} // namespace

void DecisionTree::check_node(NodeId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size()) {
        throw std::invalid_argument("DecisionTree: unknown NodeId " + std::to_string(id));
    }
}

const Node& DecisionTree::node(NodeId id) const {
    check_node(id);
    return nodes_[static_cast<std::size_t>(id)];
}

DecisionTree DecisionTree::clone() const {
    DecisionTree copy;
    copy.nodes_ = nodes_;
    copy.root_ = root_;
    copy.n_classes_ = n_classes_;
    copy.n_features_ = n_features_;
    copy.hp_ = hp_;
    copy.tag_ = next_tree_tag();
    return copy;
}

NodeId DecisionTree::leaf_for(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    if (row.size() != n_features_) {
        throw std::invalid_argument("DecisionTree: row has " + std::to_string(row.size()) +
                                    " features, tree expects " + std::to_string(n_features_));
    }
    NodeId cur = root_;
    while (!nodes_[static_cast<std::size_t>(cur)].is_leaf()) {
        const Node& nd = nodes_[static_cast<std::size_t>(cur)];
        cur = (row[nd.feature] <= nd.threshold) ? nd.left : nd.right;
    }
    return cur;
}

Eigen::VectorXd DecisionTree::predict_proba(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    const Node& leaf = nodes_[static_cast<std::size_t>(leaf_for(row))];
    const double total = leaf.class_counts.sum();
    if (!(total > 0.0)) throw std::logic_error("DecisionTree: leaf with zero class counts");
    return leaf.class_counts / total;
}

int DecisionTree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    const Eigen::VectorXd p = predict_proba(row);
    int best = 0;
    for (int c = 1; c < static_cast<int>(p.size()); ++c) {
        if (p[c] > p[best]) best = c;  // strict: ties keep the lower class
    }
    return best;
}

Eigen::MatrixXd DecisionTree::predict_proba_all(const FeatureMatrix& rows) const {
    Eigen::MatrixXd out(rows.rows(), n_classes_);
    for (Eigen::Index i = 0; i < rows.rows(); ++i) out.row(i) = predict_proba(rows.row(i)).transpose();
    return out;
}

Eigen::VectorXi DecisionTree::predict_all(const FeatureMatrix& rows) const {
    Eigen::VectorXi out(rows.rows());
    for (Eigen::Index i = 0; i < rows.rows(); ++i) out[i] = predict(rows.row(i));
    return out;
}

bool DecisionTree::is_reachable(NodeId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size()) return false;
    NodeId cur = id;
    while (cur != root_) {
        const NodeId parent = nodes_[static_cast<std::size_t>(cur)].parent;
        if (parent == kNoNode) return false;
        const Node& pn = nodes_[static_cast<std::size_t>(parent)];
        if (pn.left != cur && pn.right != cur) return false;  // detached subtree
        cur = parent;
    }
    return true;
}

PruneToken DecisionTree::prune_branch(NodeId id) {
    check_node(id);
    Node& nd = nodes_[static_cast<std::size_t>(id)];
    if (nd.is_leaf()) {
        throw std::invalid_argument("prune_branch: node " + std::to_string(id) + " is already a leaf");
    }
    if (!is_reachable(id)) {
        throw std::invalid_argument("prune_branch: node " + std::to_string(id) + " is detached");
    }
    PruneToken token(tag_, id, nd.left, nd.right);
    nd.left = kNoNode;
    nd.right = kNoNode;
    return token;
}

void DecisionTree::restore(PruneToken& token) {
    if (token.used_) throw std::logic_error("restore: token already used");
    if (token.tree_tag_ != tag_) throw std::logic_error("restore: token belongs to a different tree");
    Node& nd = nodes_[static_cast<std::size_t>(token.node_)];
    if (!nd.is_leaf()) throw std::logic_error("restore: node is not in its pruned state");
    nd.left = token.saved_left_;
    nd.right = token.saved_right_;
    token.used_ = true;
}

void DecisionTree::prune_branch_permanently(NodeId id) {
    PruneToken token = prune_branch(id);
    token.used_ = true;  // drop the receipt; the subtree stays detached
    static_cast<void>(token);
}

std::vector<std::pair<NodeId, int>> DecisionTree::internal_nodes() const {
    std::vector<std::pair<NodeId, int>> out;
    std::vector<NodeId> stack{root_};
    while (!stack.empty()) {
        const NodeId id = stack.back();
        stack.pop_back();
        const Node& nd = nodes_[static_cast<std::size_t>(id)];
        if (!nd.is_leaf()) {
            out.emplace_back(id, nd.depth);
            stack.push_back(nd.right);
            stack.push_back(nd.left);
        }
    }
    return out;
}

std::vector<NodeId> DecisionTree::subtree_node_ids(NodeId id) const {
    check_node(id);
    std::vector<NodeId> out;
    std::vector<NodeId> stack{id};
    while (!stack.empty()) {
        const NodeId cur = stack.back();
        stack.pop_back();
        out.push_back(cur);
        const Node& nd = nodes_[static_cast<std::size_t>(cur)];
        if (!nd.is_leaf()) {
            stack.push_back(nd.right);
            stack.push_back(nd.left);
        }
    }
    return out;
}

Eigen::Index DecisionTree::node_count() const {
    return static_cast<Eigen::Index>(subtree_node_ids(root_).size());
}

Eigen::Index DecisionTree::leaf_count() const {
    Eigen::Index leaves = 0;
    for (NodeId id : subtree_node_ids(root_)) {
        if (nodes_[static_cast<std::size_t>(id)].is_leaf()) ++leaves;
    }
    return leaves;
}

int DecisionTree::max_depth() const {
    int depth = 0;
    for (NodeId id : subtree_node_ids(root_)) {
        depth = std::max(depth, nodes_[static_cast<std::size_t>(id)].depth);
    }
    return depth;
}

DecisionTree fit(const Dataset& train, const TreeHyperparams& hp, std::uint64_t seed) {
    (void)seed;  // induction is fully deterministic; kept for interface uniformity
    train.validate();
    if (train.n_rows() == 0) throw std::invalid_argument("fit: empty training set");
    if (hp.max_depth < 1) throw std::invalid_argument("fit: max_depth must be >= 1");
    if (hp.min_samples_leaf < 1) throw std::invalid_argument("fit: min_samples_leaf must be >= 1");
    if (hp.min_samples_split < 2) throw std::invalid_argument("fit: min_samples_split must be >= 2");

    DecisionTree tree;
    tree.n_classes_ = train.n_classes;
    tree.n_features_ = train.n_features();
    tree.hp_ = hp;
    tree.tag_ = next_tree_tag();

    const int k = train.n_classes;

    struct BuildItem {
        NodeId id;
        std::vector<Eigen::Index> rows;
    };

    tree.nodes_.push_back(Node{});
    tree.root_ = 0;
    std::vector<BuildItem> stack;
    {
        std::vector<Eigen::Index> all(static_cast<std::size_t>(train.n_rows()));
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<Eigen::Index>(i);
        stack.push_back({0, std::move(all)});
    }

    std::vector<std::pair<double, int>> order;  // (feature value, label) per node/feature
    while (!stack.empty()) {
        BuildItem item = std::move(stack.back());
        stack.pop_back();
        Node& nd = tree.nodes_[static_cast<std::size_t>(item.id)];
        const auto n = static_cast<double>(item.rows.size());

        nd.class_counts = Eigen::VectorXd::Zero(k);
        for (Eigen::Index r : item.rows) nd.class_counts[train.labels[r]] += 1.0;

        const bool pure = (nd.class_counts.maxCoeff() == n);
        if (nd.depth >= hp.max_depth || pure ||
            static_cast<int>(item.rows.size()) < hp.min_samples_split) {
            continue;  // leaf
        }

        // Exhaustive search over (feature, midpoint threshold). Ascending
        // iteration with a strict > keeps the lowest feature index and lowest
        // threshold on exact gain ties.
        const double parent_impurity = gini(nd.class_counts, n);
        int best_feature = -1;
        double best_threshold = 0.0;
        double best_gain = 1e-12;  // a split must improve by more than noise
        Eigen::VectorXd left_counts(k);
        for (Eigen::Index j = 0; j < train.n_features(); ++j) {
            order.clear();
            for (Eigen::Index r : item.rows) order.emplace_back(train.features(r, j), train.labels[r]);
            std::sort(order.begin(), order.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            left_counts.setZero();
            for (std::size_t pos = 0; pos + 1 < order.size(); ++pos) {
                left_counts[order[pos].second] += 1.0;
                const double lo = order[pos].first;
                const double hi = order[pos + 1].first;
                if (!(lo < hi)) continue;  // can only cut between distinct values
                const auto left_n = static_cast<double>(pos + 1);
                const double right_n = n - left_n;
                if (left_n < hp.min_samples_leaf || right_n < hp.min_samples_leaf) continue;

                const double gain = parent_impurity -
                                    (left_n / n) * gini(left_counts, left_n) -
                                    (right_n / n) * gini(nd.class_counts - left_counts, right_n);
                if (gain > best_gain) {
                    double mid = lo + (hi - lo) / 2.0;
                    // Adjacent representable values can round the midpoint onto an
                    // endpoint; fall back to the lower value so `<=` routing still
                    // reproduces this exact partition.
                    if (!(mid > lo) || mid >= hi) mid = lo;
                    best_gain = gain;
                    best_feature = static_cast<int>(j);
                    best_threshold = mid;
                }
            }
        }
        if (best_feature < 0) continue;  // no split clears min_samples_leaf with positive gain

        std::vector<Eigen::Index> left_rows;
        std::vector<Eigen::Index> right_rows;
        for (Eigen::Index r : item.rows) {
            (train.features(r, best_feature) <= best_threshold ? left_rows : right_rows).push_back(r);
        }

        const auto left_id = static_cast<NodeId>(tree.nodes_.size());
        const auto right_id = static_cast<NodeId>(tree.nodes_.size() + 1);
        const int child_depth = nd.depth + 1;
        nd.feature = best_feature;
        nd.threshold = best_threshold;
        nd.left = left_id;
        nd.right = right_id;
        Node child;
        child.depth = child_depth;
        child.parent = item.id;
        tree.nodes_.push_back(child);  // invalidates nd
        tree.nodes_.push_back(child);
        stack.push_back({right_id, std::move(right_rows)});
        stack.push_back({left_id, std::move(left_rows)});
    }
    return tree;
}

void serialize_tree(const DecisionTree& tree, std::ostream& out) {
    // Canonical ids are preorder positions, so arena history is invisible.
    const std::vector<NodeId> preorder = tree.subtree_node_ids(tree.root());
    std::vector<std::int32_t> to_canonical;
    NodeId max_id = 0;
    for (NodeId id : preorder) max_id = std::max(max_id, id);
    to_canonical.assign(static_cast<std::size_t>(max_id) + 1, -1);
    for (std::size_t pos = 0; pos < preorder.size(); ++pos) {
        to_canonical[static_cast<std::size_t>(preorder[pos])] = static_cast<std::int32_t>(pos);
    }

    const TreeHyperparams& hp = tree.hyperparams();
    out << "tree 1\n";
    out << "classes " << tree.n_classes() << "\n";
    out << "features " << tree.n_features() << "\n";
    out << "params " << hp.max_depth << " " << hp.min_samples_leaf << " " << hp.min_samples_split
        << "\n";
    out << "nodes " << preorder.size() << "\n";
    for (std::size_t pos = 0; pos < preorder.size(); ++pos) {
        const Node& nd = tree.node(preorder[pos]);
        out << pos << " " << nd.depth;
        if (nd.is_leaf()) {
            out << " leaf";
        } else {
            out << " split " << nd.feature << " " << double_to_string(nd.threshold) << " "
                << to_canonical[static_cast<std::size_t>(nd.left)] << " "
                << to_canonical[static_cast<std::size_t>(nd.right)];
        }
        out << " counts";
        for (Eigen::Index c = 0; c < nd.class_counts.size(); ++c) {
            out << " " << double_to_string(nd.class_counts[c]);
        }
        out << "\n";
    }
}

std::string serialize_tree(const DecisionTree& tree) {
    std::ostringstream out;
    serialize_tree(tree, out);
    return out.str();
}

namespace {

std::runtime_error parse_error(const std::string& what) {
    return std::runtime_error("deserialize_tree: " + what);
}

std::vector<std::string> split_tokens(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    return tokens;
}

long long require_int(const std::string& tok, const std::string& context) {
    const auto v = parse_integer(tok);
    if (!v) throw parse_error("expected integer for " + context + ", got \"" + tok + "\"");
    return *v;
}

double require_double(const std::string& tok, const std::string& context) {
    const auto v = parse_double(tok);
    if (!v) throw parse_error("expected number for " + context + ", got \"" + tok + "\"");
    return *v;
}

} // namespace

DecisionTree deserialize_tree(std::istream& in) {
    std::string line;
    auto next_line = [&](const std::string& what) {
        if (!std::getline(in, line)) throw parse_error("unexpected end of input before " + what);
        return split_tokens(line);
    };

    auto header = next_line("format line");
    if (header.size() != 2 || header[0] != "tree" || header[1] != "1") {
        throw parse_error("bad format line (expected \"tree 1\")");
    }
    auto classes = next_line("classes line");
    if (classes.size() != 2 || classes[0] != "classes") throw parse_error("bad classes line");
    const long long k = require_int(classes[1], "classes");
    if (k < 2) throw parse_error("classes must be >= 2");
    auto features = next_line("features line");
    if (features.size() != 2 || features[0] != "features") throw parse_error("bad features line");
    const long long d = require_int(features[1], "features");
    if (d < 0) throw parse_error("features must be >= 0");
    auto params = next_line("params line");
    if (params.size() != 4 || params[0] != "params") throw parse_error("bad params line");
    auto counts_hdr = next_line("nodes line");
    if (counts_hdr.size() != 2 || counts_hdr[0] != "nodes") throw parse_error("bad nodes line");
    const long long n_nodes = require_int(counts_hdr[1], "node count");
    if (n_nodes < 1) throw parse_error("node count must be >= 1");

    DecisionTree tree;
    tree.n_classes_ = static_cast<int>(k);
    tree.n_features_ = static_cast<Eigen::Index>(d);
    tree.hp_.max_depth = static_cast<int>(require_int(params[1], "max_depth"));
    tree.hp_.min_samples_leaf = static_cast<int>(require_int(params[2], "min_samples_leaf"));
    tree.hp_.min_samples_split = static_cast<int>(require_int(params[3], "min_samples_split"));
    tree.root_ = 0;
    tree.tag_ = next_tree_tag();
    tree.nodes_.resize(static_cast<std::size_t>(n_nodes));

    for (long long i = 0; i < n_nodes; ++i) {
        auto tok = next_line("node " + std::to_string(i));
        if (tok.size() < 3) throw parse_error("node line too short");
        if (require_int(tok[0], "node id") != i) {
            throw parse_error("node ids must be sequential preorder positions");
        }
        Node nd;
        nd.depth = static_cast<int>(require_int(tok[1], "depth"));
        std::size_t at = 2;
        if (tok[at] == "split") {
            if (tok.size() < at + 5) throw parse_error("split line too short");
            nd.feature = static_cast<int>(require_int(tok[at + 1], "feature"));
            nd.threshold = require_double(tok[at + 2], "threshold");
            nd.left = static_cast<NodeId>(require_int(tok[at + 3], "left id"));
            nd.right = static_cast<NodeId>(require_int(tok[at + 4], "right id"));
            if (nd.feature < 0 || nd.feature >= d) throw parse_error("feature index out of range");
            if (nd.left <= i || nd.right <= i || nd.left >= n_nodes || nd.right >= n_nodes) {
                throw parse_error("child ids must point forward in preorder");
            }
            at += 5;
        } else if (tok[at] == "leaf") {
            at += 1;
        } else {
            throw parse_error("expected \"split\" or \"leaf\", got \"" + tok[at] + "\"");
        }
        if (at >= tok.size() || tok[at] != "counts") throw parse_error("missing counts");
        ++at;
        if (tok.size() - at != static_cast<std::size_t>(k)) {
            throw parse_error("expected " + std::to_string(k) + " class counts");
        }
        nd.class_counts.resize(k);
        for (long long c = 0; c < k; ++c) {
            nd.class_counts[c] = require_double(tok[at + static_cast<std::size_t>(c)], "class count");
            if (nd.class_counts[c] < 0.0) throw parse_error("negative class count");
        }
        if (!(nd.class_counts.sum() > 0.0)) throw parse_error("node with zero total count");
        tree.nodes_[static_cast<std::size_t>(i)] = std::move(nd);
    }

    if (tree.nodes_[0].depth != 0) throw parse_error("root depth must be 0");
    for (long long i = 0; i < n_nodes; ++i) {
        Node& nd = tree.nodes_[static_cast<std::size_t>(i)];
        if (nd.is_leaf()) continue;
        for (NodeId child : {nd.left, nd.right}) {
            Node& ch = tree.nodes_[static_cast<std::size_t>(child)];
            if (ch.parent != kNoNode) throw parse_error("node has two parents");
            ch.parent = static_cast<NodeId>(i);
            if (ch.depth != nd.depth + 1) throw parse_error("child depth must be parent depth + 1");
        }
        const Eigen::VectorXd child_sum = tree.nodes_[static_cast<std::size_t>(nd.left)].class_counts +
                                          tree.nodes_[static_cast<std::size_t>(nd.right)].class_counts;
        if ((child_sum - nd.class_counts).cwiseAbs().maxCoeff() > 1e-9) {
            throw parse_error("parent class counts must equal the sum of its children's");
        }
    }
    for (long long i = 1; i < n_nodes; ++i) {
        if (tree.nodes_[static_cast<std::size_t>(i)].parent == kNoNode) {
            throw parse_error("unreachable node " + std::to_string(i));
        }
    }
    return tree;
}

DecisionTree deserialize_tree(const std::string& text) {
    std::istringstream in(text);
    return deserialize_tree(in);
}

} // namespace mabprune
