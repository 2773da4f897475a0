#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>

#include "mabprune/dataset.hpp"

using namespace mabprune;

namespace {

std::string work_path(const std::string& name) {
    std::filesystem::create_directories(WORK_DIR);
    return std::string(WORK_DIR) + "/" + name;
}

std::string write_file(const std::string& name, const std::string& text) {
    const std::string path = work_path(name);
    std::ofstream out(path);
    out << text;
    return path;
}

Dataset tiny_dataset(Eigen::Index n, int n_classes = 2) {
    Dataset d;
    d.features.resize(n, 2);
    d.labels.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        d.features(i, 0) = double(i);
        d.features(i, 1) = double(i) * 0.5;
        d.labels[i] = int(i % n_classes);
    }
    d.feature_names = {"f0", "f1"};
    d.n_classes = n_classes;
    return d;
}

} // namespace

TEST_SUITE("dataset") {

TEST_CASE("validate accepts a well-formed dataset and rejects broken ones") {
    Dataset d = tiny_dataset(6);
    CHECK_NOTHROW(d.validate());

    Dataset bad_rows = tiny_dataset(6);
    bad_rows.labels.resize(5);
    CHECK_THROWS_AS(bad_rows.validate(), std::invalid_argument);

    Dataset bad_label = tiny_dataset(6);
    bad_label.labels[2] = 7;
    CHECK_THROWS_AS(bad_label.validate(), std::invalid_argument);

    Dataset bad_classes = tiny_dataset(6);
    bad_classes.n_classes = 1;
    CHECK_THROWS_AS(bad_classes.validate(), std::invalid_argument);
}

TEST_CASE("select_rows keeps the chosen rows and inherits leak_guard") {
    Dataset d = tiny_dataset(6);
    d.leak_guard = true;
    Dataset sub = d.select_rows({1, 4});
    CHECK(sub.n_rows() == 2);
    CHECK(sub.features(0, 0) == 1.0);
    CHECK(sub.features(1, 0) == 4.0);
    CHECK(sub.labels[0] == 1);
    CHECK(sub.leak_guard);
    CHECK_THROWS_AS(d.select_rows({99}), std::out_of_range);
}

TEST_CASE("load_csv reads numeric features and encodes labels") {
    const std::string path = write_file("basic.csv",
                                        "x,color,y\n"
                                        "1.5,red,yes\n"
                                        "2.5,blue,no\n"
                                        "3.5,red,yes\n"
                                        "4.5,green,no\n");
    Dataset d = load_csv(path, "y", std::string("yes"));
    CHECK(d.n_rows() == 4);
    CHECK(d.n_features() == 2);
    CHECK(d.n_classes == 2);
    CHECK(d.feature_names == std::vector<std::string>{"x", "color"});
    // positive_label "yes" becomes class 1
    CHECK(d.labels[0] == 1);
    CHECK(d.labels[1] == 0);
    // string column label-encoded in first-appearance order: red=0, blue=1, green=2
    CHECK(d.features(0, 1) == 0.0);
    CHECK(d.features(1, 1) == 1.0);
    CHECK(d.features(3, 1) == 2.0);
}

TEST_CASE("load_csv without positive_label sorts distinct targets") {
    // Numeric-looking targets sort numerically, so "10" lands above "2".
    const std::string path = write_file("numeric_target.csv",
                                        "x,y\n"
                                        "1,10\n"
                                        "2,2\n"
                                        "3,10\n"
                                        "4,5\n");
    Dataset d = load_csv(path, "y");
    CHECK(d.n_classes == 3);
    CHECK(d.labels[1] == 0);  // 2
    CHECK(d.labels[3] == 1);  // 5
    CHECK(d.labels[0] == 2);  // 10
}

TEST_CASE("load_csv error cases") {
    const std::string missing = write_file("missing.csv", "x,y\n1,\n2,0\n");
    CHECK_THROWS_WITH_AS(load_csv(missing, "y"), doctest::Contains("missing value"),
                         std::runtime_error);

    const std::string no_col = write_file("no_col.csv", "x,y\n1,0\n");
    CHECK_THROWS_WITH_AS(load_csv(no_col, "z"), doctest::Contains("\"z\" not found"),
                         std::runtime_error);

    const std::string one_class = write_file("one_class.csv", "x,y\n1,a\n2,a\n");
    CHECK_THROWS_AS(load_csv(one_class, "y"), std::runtime_error);

    const std::string ragged = write_file("ragged.csv", "x,y\n1,0\n1,2,3\n");
    CHECK_THROWS_AS(load_csv(ragged, "y"), std::runtime_error);

    CHECK_THROWS_AS(load_csv(work_path("does_not_exist.csv"), "y"), std::runtime_error);
}

TEST_CASE("save_csv then load_csv round-trips features exactly") {
    Dataset d = tiny_dataset(5);
    d.features(0, 0) = 1.0 / 3.0;
    d.features(1, 1) = 1e-17;
    d.features(2, 0) = -0.1;
    const std::string path = work_path("roundtrip.csv");
    save_csv(d, path);
    Dataset back = load_csv(path, "target");
    REQUIRE(back.n_rows() == d.n_rows());
    REQUIRE(back.n_features() == d.n_features());
    CHECK(back.features == d.features);
    CHECK(back.labels == d.labels);
    CHECK(back.feature_names == d.feature_names);
}

TEST_CASE("split is stratified and sized by round(train_fraction * n)") {
    Dataset d = tiny_dataset(100);  // 50/50 classes
    auto [train, test] = split(d, SplitSpec{0.65, 42});
    CHECK(train.n_rows() == 65);
    CHECK(test.n_rows() == 35);
    // Per-class counts stay within 1 of proportional.
    for (int c = 0; c < 2; ++c) {
        Eigen::Index got = (train.labels.array() == c).count();
        CHECK(std::abs(double(got) - 0.65 * 50) <= 1.0);
    }
    // Disjoint and exhaustive by construction: feature column 0 was the row index.
    std::set<double> seen;
    for (Eigen::Index i = 0; i < train.n_rows(); ++i) seen.insert(train.features(i, 0));
    for (Eigen::Index i = 0; i < test.n_rows(); ++i) seen.insert(test.features(i, 0));
    CHECK(seen.size() == 100);
}

TEST_CASE("split is deterministic per seed") {
    Dataset d = tiny_dataset(40);
    auto [a_train, a_test] = split(d, SplitSpec{0.5, 7});
    auto [b_train, b_test] = split(d, SplitSpec{0.5, 7});
    CHECK(a_train.features == b_train.features);
    auto [c_train, c_test] = split(d, SplitSpec{0.5, 8});
    CHECK(a_train.features != c_train.features);
}

TEST_CASE("split error cases") {
    Dataset d = tiny_dataset(10);
    CHECK_THROWS_AS(split(d, SplitSpec{0.0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(split(d, SplitSpec{1.0, 1}), std::invalid_argument);

    Dataset lopsided = tiny_dataset(10);
    lopsided.labels.setZero();
    lopsided.labels[0] = 1;  // class 1 has a single sample
    CHECK_THROWS_AS(split(lopsided, SplitSpec{0.5, 1}), std::invalid_argument);
}

TEST_CASE("sample_subset draws k unique rows in original order") {
    Dataset d = tiny_dataset(100);
    Rng rng = make_rng(3, 0);
    Dataset sub = sample_subset(d, 0.1, 5, rng);
    CHECK(sub.n_rows() == 10);  // round(0.1 * 100) > floor
    Rng rng2 = make_rng(3, 0);
    Dataset floored = sample_subset(d, 0.01, 30, rng2);
    CHECK(floored.n_rows() == 30);  // floor dominates

    // Unique and ascending (original order preserved).
    std::set<double> seen;
    for (Eigen::Index i = 0; i < sub.n_rows(); ++i) {
        seen.insert(sub.features(i, 0));
        if (i > 0) CHECK(sub.features(i, 0) > sub.features(i - 1, 0));
    }
    CHECK(Eigen::Index(seen.size()) == sub.n_rows());

    // Capped at n.
    Dataset small = tiny_dataset(4);
    Rng rng3 = make_rng(1, 0);
    CHECK(sample_subset(small, 0.5, 30, rng3).n_rows() == 4);
}

TEST_CASE("sample_subset is deterministic given the rng state") {
    Dataset d = tiny_dataset(50);
    Rng a = make_rng(11, 0);
    Rng b = make_rng(11, 0);
    CHECK(sample_subset(d, 0.2, 1, a).features == sample_subset(d, 0.2, 1, b).features);
}

TEST_CASE("generate_synthetic shape and determinism") {
    SyntheticSpec spec;
    spec.n_samples = 200;
    spec.n_features = 6;
    spec.n_informative = 3;
    spec.class_separation = 2.0;
    spec.label_noise = 0.0;
    spec.seed = 9;
    Dataset d = generate_synthetic(spec);
    CHECK(d.n_rows() == 200);
    CHECK(d.n_features() == 6);
    CHECK(d.n_classes == 2);
    CHECK_NOTHROW(d.validate());

    // Noise-free labels alternate 0,1,0,1,...
    for (Eigen::Index i = 0; i < d.n_rows(); ++i) CHECK(d.labels[i] == int(i % 2));

    Dataset again = generate_synthetic(spec);
    CHECK(again.features == d.features);
    CHECK(again.labels == d.labels);
}

TEST_CASE("generate_synthetic flips roughly label_noise of the labels") {
    SyntheticSpec spec;
    spec.n_samples = 4000;
    spec.n_features = 4;
    spec.n_informative = 2;
    spec.label_noise = 0.1;
    spec.seed = 5;
    Dataset d = generate_synthetic(spec);
    Eigen::Index flips = 0;
    for (Eigen::Index i = 0; i < d.n_rows(); ++i)
        if (d.labels[i] != int(i % 2)) ++flips;
    // Binomial(4000, 0.1): mean 400, sd ~19; allow 3 sigma.
    CHECK(flips > 400 - 57);
    CHECK(flips < 400 + 57);
}

TEST_CASE("generate_synthetic separates informative features only") {
    SyntheticSpec spec;
    spec.n_samples = 10000;
    spec.n_features = 4;
    spec.n_informative = 2;
    spec.class_separation = 3.0;
    spec.seed = 12;
    Dataset d = generate_synthetic(spec);
    for (Eigen::Index j = 0; j < 4; ++j) {
        double sum0 = 0, sum1 = 0;
        Eigen::Index n0 = 0, n1 = 0;
        for (Eigen::Index i = 0; i < d.n_rows(); ++i) {
            if (d.labels[i] == 0) { sum0 += d.features(i, j); ++n0; }
            else                  { sum1 += d.features(i, j); ++n1; }
        }
        const double gap = sum1 / double(n1) - sum0 / double(n0);
        if (j < 2) CHECK(std::abs(gap) == doctest::Approx(3.0).epsilon(0.05));
        else       CHECK(std::abs(gap) < 0.15);
    }
}

TEST_CASE("generate_synthetic validates its spec") {
    SyntheticSpec spec;
    spec.n_samples = 10;
    spec.n_features = 2;
    spec.n_informative = 1;
    spec.label_noise = 0.5;  // must be < 0.5
    CHECK_THROWS_AS(generate_synthetic(spec), std::invalid_argument);
    spec.label_noise = 0.1;
    spec.n_informative = 3;  // more informative than features
    CHECK_THROWS_AS(generate_synthetic(spec), std::invalid_argument);
}

} // TEST_SUITE
