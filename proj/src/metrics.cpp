#include "mabprune/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mabprune {

namespace {

void check_lengths(const Eigen::VectorXi& predictions, const Eigen::VectorXi& labels,
                   const char* op) {
    if (predictions.size() != labels.size()) {
        throw std::invalid_argument(std::string(op) + ": length mismatch (" +
                                    std::to_string(predictions.size()) + " vs " +
                                    std::to_string(labels.size()) + ")");
    }
    if (labels.size() == 0) throw std::invalid_argument(std::string(op) + ": empty input");
}

} // namespace

double accuracy(const Eigen::VectorXi& predictions, const Eigen::VectorXi& labels) {
    check_lengths(predictions, labels, "accuracy");
    Eigen::Index hits = 0;
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        if (predictions[i] == labels[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double scaled_log_loss(const Eigen::MatrixXd& probas, const Eigen::VectorXi& labels) {
    if (probas.rows() != labels.size()) {
        throw std::invalid_argument("scaled_log_loss: row count != label count");
    }
    if (labels.size() == 0) throw std::invalid_argument("scaled_log_loss: empty input");
    const Eigen::Index k = probas.cols();
    if (k < 2) throw std::invalid_argument("scaled_log_loss: need at least 2 classes");

    constexpr double kClip = 1e-15;
    double total = 0.0;
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        if (std::abs(probas.row(i).sum() - 1.0) > 1e-9) {
            throw std::invalid_argument("scaled_log_loss: row " + std::to_string(i) +
                                        " does not sum to 1");
        }
        if (labels[i] < 0 || labels[i] >= k) {
            throw std::invalid_argument("scaled_log_loss: label out of range at row " +
                                        std::to_string(i));
        }
        const double p = std::clamp(probas(i, labels[i]), kClip, 1.0 - kClip);
        total -= std::log(p);
    }
    const double raw = total / static_cast<double>(labels.size());
    return std::min(1.0, raw / std::log(static_cast<double>(k)));
}

double f1(const Eigen::VectorXi& predictions, const Eigen::VectorXi& labels, int positive_class) {
    check_lengths(predictions, labels, "f1");
    double tp = 0.0;
    double fp = 0.0;
    double fn = 0.0;
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        const bool pred_pos = predictions[i] == positive_class;
        const bool true_pos = labels[i] == positive_class;
        if (pred_pos && true_pos) tp += 1.0;
        else if (pred_pos) fp += 1.0;
        else if (true_pos) fn += 1.0;
    }
    const double denom = 2.0 * tp + fp + fn;
    if (denom == 0.0) return 0.0;
    return 2.0 * tp / denom;  // algebraically 2PR/(P+R), safe when P+R = 0
}

double weighted_macro_f1(const Eigen::VectorXi& predictions, const Eigen::VectorXi& labels,
                         int n_classes) {
    check_lengths(predictions, labels, "weighted_macro_f1");
    if (n_classes < 2) throw std::invalid_argument("weighted_macro_f1: need at least 2 classes");
    double weighted = 0.0;
    for (int c = 0; c < n_classes; ++c) {
        Eigen::Index support = 0;
        for (Eigen::Index i = 0; i < labels.size(); ++i) {
            if (labels[i] == c) ++support;
        }
        if (support == 0) continue;
        weighted += f1(predictions, labels, c) *
                    (static_cast<double>(support) / static_cast<double>(labels.size()));
    }
    return weighted;
}

double performance(const EvalResult& e, const MetricWeights& w) {
    return w.alpha * e.accuracy - w.beta * e.scaled_log_loss + w.gamma * e.f1;
}

double delta_score(const EvalResult& before, const EvalResult& after, const MetricWeights& w) {
    return w.alpha * (after.accuracy - before.accuracy) +
           w.gamma * (after.f1 - before.f1) -
           w.beta * (after.scaled_log_loss - before.scaled_log_loss);
}

EvalResult evaluate(const DecisionTree& tree, const Dataset& data, int positive_class,
                    F1Average average) {
    if (data.leak_guard) {
        throw std::logic_error("evaluate: dataset is leak-guarded (held-out split touched "
                               "before final assessment)");
    }
    if (data.n_rows() == 0) throw std::invalid_argument("evaluate: empty dataset");
    if (data.n_features() != tree.n_features()) {
        throw std::invalid_argument("evaluate: dataset has " + std::to_string(data.n_features()) +
                                    " features, tree expects " + std::to_string(tree.n_features()));
    }

    const Eigen::MatrixXd probas = tree.predict_proba_all(data.features);
    Eigen::VectorXi predictions(data.n_rows());
    for (Eigen::Index i = 0; i < data.n_rows(); ++i) {
        int best = 0;
        for (int c = 1; c < tree.n_classes(); ++c) {
            if (probas(i, c) > probas(i, best)) best = c;
        }
        predictions[i] = best;
    }

    EvalResult result;
    result.accuracy = accuracy(predictions, data.labels);
    result.scaled_log_loss = scaled_log_loss(probas, data.labels);
    const bool positive = average == F1Average::Positive ||
                          (average == F1Average::Auto && tree.n_classes() == 2);
    result.f1 = positive ? f1(predictions, data.labels, positive_class)
                         : weighted_macro_f1(predictions, data.labels, tree.n_classes());
    return result;
}

} // namespace mabprune
