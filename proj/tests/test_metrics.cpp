#include <doctest.h>

#include <stdexcept>

#include "mabprune/dataset.hpp"
#include "mabprune/metrics.hpp"
#include "mabprune/tree.hpp"

using namespace mabprune;

namespace {

Eigen::VectorXi vec(std::initializer_list<int> v) {
    Eigen::VectorXi out(Eigen::Index(v.size()));
    Eigen::Index i = 0;
    for (int x : v) out[i++] = x;
    return out;
}

} // namespace

TEST_SUITE("metrics") {

TEST_CASE("accuracy counts exact matches") {
    CHECK(accuracy(vec({0, 1, 1, 0}), vec({0, 1, 0, 0})) == 0.75);
    CHECK(accuracy(vec({2, 2}), vec({2, 2})) == 1.0);
    CHECK(accuracy(vec({0}), vec({1})) == 0.0);
    CHECK_THROWS_AS(accuracy(vec({0, 1}), vec({0})), std::invalid_argument);
    CHECK_THROWS_AS(accuracy(vec({}), vec({})), std::invalid_argument);
}

TEST_CASE("scaled_log_loss matches the hand-computed binary value") {
    // Confidence 0.9 on the true class: -ln(0.9) / ln(2).
    Eigen::MatrixXd p(2, 2);
    p << 0.1, 0.9, 0.9, 0.1;
    CHECK(scaled_log_loss(p, vec({1, 0})) == doctest::Approx(0.15200309344504997).epsilon(1e-14));
}

TEST_CASE("scaled_log_loss normalization and cap") {
    SUBCASE("uniform binary guesser scores 1") {
        Eigen::MatrixXd p(3, 2);
        p.setConstant(0.5);
        const double loss = scaled_log_loss(p, vec({0, 1, 0}));
        CHECK(loss == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(loss <= 1.0);
    }
    SUBCASE("uniform three-class guesser scores 1") {
        Eigen::MatrixXd p(2, 3);
        p.setConstant(1.0 / 3.0);
        CHECK(scaled_log_loss(p, vec({2, 0})) == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("worse than uniform caps at exactly 1") {
        Eigen::MatrixXd p(1, 2);
        p << 0.9, 0.1;  // confidently wrong
        CHECK(scaled_log_loss(p, vec({1})) == 1.0);
    }
    SUBCASE("hard zeros and ones survive via clipping") {
        Eigen::MatrixXd p(1, 2);
        p << 1.0, 0.0;
        CHECK(scaled_log_loss(p, vec({0})) == doctest::Approx(0.0));
        CHECK(scaled_log_loss(p, vec({1})) == 1.0);  // -ln(1e-15) far above ln 2
    }
}

TEST_CASE("scaled_log_loss input validation") {
    Eigen::MatrixXd p(2, 2);
    p << 0.5, 0.5, 0.5, 0.5;
    CHECK_THROWS_AS(scaled_log_loss(p, vec({0})), std::invalid_argument);
    CHECK_THROWS_AS(scaled_log_loss(Eigen::MatrixXd(0, 2), vec({})), std::invalid_argument);
    CHECK_THROWS_WITH_AS(scaled_log_loss(p, vec({0, 5})), doctest::Contains("label out of range"),
                         std::invalid_argument);

    Eigen::MatrixXd bad_sum(1, 2);
    bad_sum << 0.6, 0.6;
    CHECK_THROWS_WITH_AS(scaled_log_loss(bad_sum, vec({0})), doctest::Contains("sum to 1"),
                         std::invalid_argument);

    Eigen::MatrixXd one_col(2, 1);
    one_col << 1.0, 1.0;
    CHECK_THROWS_AS(scaled_log_loss(one_col, vec({0, 0})), std::invalid_argument);
}

TEST_CASE("f1 is the harmonic mean of precision and recall") {
    // tp=1, fp=1, fn=1: precision = recall = 0.5.
    CHECK(f1(vec({1, 1, 0, 0}), vec({1, 0, 1, 0}), 1) == 0.5);
    CHECK(f1(vec({1, 1, 0}), vec({1, 1, 0}), 1) == 1.0);
    // tp=2, fp=0, fn=1 -> 2*2/(4+0+1).
    CHECK(f1(vec({0, 0, 1, 1}), vec({0, 1, 1, 1}), 1) == 0.8);
    // No positive predictions and no positive labels: define as 0.
    CHECK(f1(vec({0, 0}), vec({0, 0}), 1) == 0.0);
    // The positive class matters.
    CHECK(f1(vec({1, 1, 0, 0}), vec({1, 0, 1, 0}), 0) == 0.5);
    CHECK(f1(vec({0, 0, 1, 1}), vec({0, 1, 1, 1}), 0) == doctest::Approx(2.0 / 3.0));
    CHECK_THROWS_AS(f1(vec({}), vec({}), 1), std::invalid_argument);
}

TEST_CASE("weighted_macro_f1 weights per-class f1 by support") {
    const Eigen::VectorXi labels = vec({0, 0, 1, 2});
    const Eigen::VectorXi preds = vec({0, 1, 1, 2});
    // class 0: f1 2/3 weight 1/2; class 1: f1 2/3 weight 1/4; class 2: f1 1 weight 1/4.
    CHECK(weighted_macro_f1(preds, labels, 3) == doctest::Approx(0.75));
    // Absent classes contribute nothing.
    CHECK(weighted_macro_f1(preds, labels, 4) == doctest::Approx(0.75));
    CHECK_THROWS_AS(weighted_macro_f1(preds, labels, 1), std::invalid_argument);
}

TEST_CASE("performance applies alpha, beta, gamma") {
    EvalResult e{0.8, 0.3, 0.6};
    CHECK(performance(e, MetricWeights{}) == doctest::Approx(0.8 - 0.3 + 2.5 * 0.6));
    CHECK(performance(e, MetricWeights{2.0, 0.5, 1.0}) == doctest::Approx(1.6 - 0.15 + 0.6));
}

TEST_CASE("delta_score equals the performance difference") {
    EvalResult a{0.8, 0.3, 0.6};
    EvalResult b{0.75, 0.45, 0.9};
    MetricWeights w{1.3, 0.7, 2.1};
    CHECK(delta_score(a, b, w) == doctest::Approx(performance(b, w) - performance(a, w)));
    CHECK(delta_score(a, a, w) == 0.0);
}

TEST_CASE("evaluate combines the three metrics over a tree") {
    DecisionTree tree = deserialize_tree(
        "tree 1\nclasses 2\nfeatures 1\nparams 3 1 2\nnodes 3\n"
        "0 0 split 0 0.5 1 2 counts 4 4\n"
        "1 1 leaf counts 3 1\n"
        "2 1 leaf counts 1 3\n");
    Dataset d;
    d.features.resize(4, 1);
    d.features << 0, 0, 1, 1;
    d.labels = vec({0, 1, 1, 1});
    d.n_classes = 2;

    EvalResult e = evaluate(tree, d);
    CHECK(e.accuracy == 0.75);
    // p_true = .75, .25, .75, .75 -> mean nll / ln 2.
    CHECK(e.scaled_log_loss == doctest::Approx(0.8112781244591328).epsilon(1e-14));
    CHECK(e.f1 == 0.8);  // binary Auto uses the positive class
}

TEST_CASE("evaluate picks weighted macro f1 for multiclass Auto") {
    DecisionTree tree = deserialize_tree(
        "tree 1\nclasses 3\nfeatures 1\nparams 3 1 2\nnodes 1\n0 0 leaf counts 2 1 1\n");
    Dataset d;
    d.features.resize(4, 1);
    d.features << 0, 1, 2, 3;
    d.labels = vec({0, 1, 2, 0});
    d.n_classes = 3;

    EvalResult e = evaluate(tree, d);
    CHECK(e.accuracy == 0.5);
    CHECK(e.scaled_log_loss == doctest::Approx(0.946394630357186).epsilon(1e-14));
    // Always predicts 0: class 0 f1 = 2/3 with support 1/2, others 0.
    CHECK(e.f1 == doctest::Approx(1.0 / 3.0));

    // Positive override scores a single class even for multiclass.
    CHECK(evaluate(tree, d, 0, F1Average::Positive).f1 == doctest::Approx(2.0 / 3.0));
    CHECK(evaluate(tree, d, 1, F1Average::Positive).f1 == 0.0);
}

TEST_CASE("evaluate refuses leak-guarded data and shape mismatches") {
    DecisionTree tree = deserialize_tree(
        "tree 1\nclasses 2\nfeatures 1\nparams 3 1 2\nnodes 1\n0 0 leaf counts 1 1\n");
    Dataset d;
    d.features.resize(2, 1);
    d.features << 0, 1;
    d.labels = vec({0, 1});
    d.n_classes = 2;
    CHECK_NOTHROW(evaluate(tree, d));

    d.leak_guard = true;
    CHECK_THROWS_WITH_AS(evaluate(tree, d), doctest::Contains("leak-guarded"), std::logic_error);
    d.leak_guard = false;

    Dataset wide = d;
    wide.features.resize(2, 2);
    wide.features.setZero();
    CHECK_THROWS_AS(evaluate(tree, wide), std::invalid_argument);

    Dataset empty = d;
    empty.features.resize(0, 1);
    empty.labels.resize(0);
    CHECK_THROWS_AS(evaluate(tree, empty), std::invalid_argument);
}

} // TEST_SUITE
