#pragma once

#include <Eigen/Dense>

#include "mabprune/dataset.hpp"
#include "mabprune/tree.hpp"

namespace mabprune {

/// Weights of the composite objective: alpha * accuracy - beta * loss + gamma * f1.
struct MetricWeights {
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 2.5;
};

struct EvalResult {
    double accuracy = 0.0;
    double scaled_log_loss = 0.0;
    double f1 = 0.0;
};

enum class F1Average {
    Auto,           // positive-class for binary, weighted macro otherwise
    Positive,       // F1 of the configured positive class
    WeightedMacro,  // per-class F1 weighted by class support
};

/// Fraction of exact matches.
double accuracy(const Eigen::VectorXi& predictions, const Eigen::VectorXi& labels);

/// Cross-entropy of the true class, probabilities clipped to
/// [1e-15, 1 - 1e-15], divided by ln K and capped at 1 so a uniform guesser
/// scores exactly 1. Rows must sum to 1 within 1e-9.
double scaled_log_loss(const Eigen::MatrixXd& probas, const Eigen::VectorXi& labels);

/// Harmonic mean of precision and recall for positive_class; 0 when both
/// vanish.
double f1(const Eigen::VectorXi& predictions, const Eigen::VectorXi& labels, int positive_class);

/// Per-class F1 weighted by true-label support.
double weighted_macro_f1(const Eigen::VectorXi& predictions, const Eigen::VectorXi& labels,
                         int n_classes);

double performance(const EvalResult& e, const MetricWeights& w);

/// Weighted score change from `before` to `after`; identical to
/// performance(after) - performance(before).
double delta_score(const EvalResult& before, const EvalResult& after, const MetricWeights& w);

/// All three metrics in one pass. Throws std::logic_error when the dataset is
/// leak-guarded — held-out splits stay untouched until final assessment.
EvalResult evaluate(const DecisionTree& tree, const Dataset& data, int positive_class = 1,
                    F1Average average = F1Average::Auto);

} // namespace mabprune
