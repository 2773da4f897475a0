#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

namespace mabprune {

/// Composite performance per (dataset, method); rows are datasets, columns
/// are methods.
struct ScoreMatrix {
    std::vector<std::string> datasets;
    std::vector<std::string> methods;
    Eigen::MatrixXd scores;

    void validate() const;
    Eigen::Index method_index(const std::string& name) const;  // -1 when absent
};

struct TTestResult {
    double t_statistic = 0.0;
    double p_value = 1.0;
    long long df = 0;
    double mean_improvement_pct = 0.0;
    // Set when the differences have zero variance but nonzero mean: t is
    // +/- infinity and p is 0.
    bool zero_variance = false;
    // Set by the benchmark layer when both columns coincide exactly (e.g. a
    // policy that never pruned scores identically to the unpruned baseline);
    // paired_t_test itself rejects that input.
    bool identical_scores = false;
};

/// Paired t-test of b against baseline a: d = b - a, t = mean(d) / (sd / sqrt n)
/// with the n-1 sample deviation, two-tailed p at df = n - 1. Improvement is
/// (mean(b) / mean(a) - 1) * 100. All-zero differences are an error.
TTestResult paired_t_test(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Two-tailed Student-t tail mass: I_x(df/2, 1/2) at x = df / (df + t^2).
double student_t_two_tailed_p(double t, long long df);

/// Per-dataset ranking by descending score, with scores tied at 3-decimal
/// precision sharing the average of their positions; returns (method, mean
/// rank over datasets) sorted ascending by mean rank.
std::vector<std::pair<std::string, double>> mean_ranks(const ScoreMatrix& m);

struct MeanScores {
    std::vector<double> per_method;   // aligned with m.methods
    std::vector<double> per_dataset;  // aligned with m.datasets
};

MeanScores mean_scores(const ScoreMatrix& m);

/// CSV round-trip: header "dataset,<method>,...", one row per dataset.
ScoreMatrix load_score_matrix(const std::string& path);
void save_score_matrix(const ScoreMatrix& m, const std::string& path);

} // namespace mabprune
