#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mabprune/rng.hpp"

namespace mabprune {

// Row-major so a sample row is a contiguous slice.
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Tabular classification data: rows are samples, columns are features,
/// labels are class indices in [0, n_classes). Immutable by convention once
/// built; all operations below return new datasets.
struct Dataset {
    FeatureMatrix features;
    Eigen::VectorXi labels;
    std::vector<std::string> feature_names;
    int n_classes = 0;

    // When set, metric evaluation over this data throws. The benchmark
    // pipeline flags its held-out split this way until final assessment.
    bool leak_guard = false;

    Eigen::Index n_rows() const { return features.rows(); }
    Eigen::Index n_features() const { return features.cols(); }

    /// Throws std::invalid_argument when a shape or label invariant is broken.
    void validate() const;

    /// New dataset holding the given rows (leak_guard is inherited).
    Dataset select_rows(const std::vector<Eigen::Index>& idx) const;
};

struct SplitSpec {
    double train_fraction = 0.65;
    std::uint64_t seed = 0;
};

struct SyntheticSpec {
    Eigen::Index n_samples = 0;
    Eigen::Index n_features = 0;
    Eigen::Index n_informative = 0;
    double class_separation = 1.0;
    double label_noise = 0.0;  // fraction of labels flipped, in [0, 0.5)
    std::uint64_t seed = 0;
};

/// Loads a CSV with a mandatory header row. Non-target columns become
/// features; columns with any non-numeric cell are label-encoded in first
/// appearance order. The target column becomes class indices; when
/// positive_label is given the problem is binary with that label as class 1.
/// Missing (empty) cells are rejected.
Dataset load_csv(const std::string& path, const std::string& target_column,
                 const std::optional<std::string>& positive_label = std::nullopt);

/// Inverse of load_csv for numeric data; feature values round-trip exactly.
void save_csv(const Dataset& data, const std::string& path,
              const std::string& target_column = "target");

/// Stratified split. Train receives round(train_fraction * n) samples,
/// apportioned per class by largest remainder; deterministic per seed.
std::pair<Dataset, Dataset> split(const Dataset& data, const SplitSpec& spec);

/// max(floor, round(fraction * n)) rows drawn uniformly without replacement,
/// capped at n. Rows keep their original relative order.
Dataset sample_subset(const Dataset& data, double fraction, Eigen::Index floor_rows, Rng& rng);

/// Binary-class Gaussian clusters: the first n_informative features have
/// class-conditional means +/- class_separation/2, the rest are pure noise.
/// Pre-noise labels alternate 0,1,0,1,... so flips are observable; the flip
/// stream is independent of the feature stream.
Dataset generate_synthetic(const SyntheticSpec& spec);

} // namespace mabprune
