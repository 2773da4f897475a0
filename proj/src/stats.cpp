#include "mabprune/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "mabprune/csv.hpp"
#include "mabprune/special_functions.hpp"

namespace mabprune {

void ScoreMatrix::validate() const {
    if (datasets.empty() || methods.empty()) {
        throw std::invalid_argument("ScoreMatrix: needs at least one dataset and one method");
    }
    if (scores.rows() != static_cast<Eigen::Index>(datasets.size()) ||
        scores.cols() != static_cast<Eigen::Index>(methods.size())) {
        throw std::invalid_argument("ScoreMatrix: matrix shape does not match the name lists");
    }
    if (!scores.allFinite()) throw std::invalid_argument("ScoreMatrix: non-finite score entry");
}

Eigen::Index ScoreMatrix::method_index(const std::string& name) const {
    for (std::size_t j = 0; j < methods.size(); ++j) {
        if (methods[j] == name) return static_cast<Eigen::Index>(j);
    }
    return -1;
}

TTestResult paired_t_test(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) throw std::invalid_argument("paired_t_test: length mismatch");
    const Eigen::Index n = a.size();
    if (n < 2) throw std::invalid_argument("paired_t_test: need at least 2 pairs");

    const Eigen::VectorXd d = b - a;
    const double mean_d = d.mean();
    const double ss = (d.array() - mean_d).square().sum();
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));

    TTestResult result;
    result.df = n - 1;
    result.mean_improvement_pct = (b.mean() / a.mean() - 1.0) * 100.0;
    if (sd == 0.0) {
        if (mean_d == 0.0) {
            throw std::invalid_argument("paired_t_test: all differences are zero");
        }
        result.zero_variance = true;
        result.t_statistic = mean_d > 0.0 ? std::numeric_limits<double>::infinity()
                                          : -std::numeric_limits<double>::infinity();
        result.p_value = 0.0;
        return result;
    }
    result.t_statistic = mean_d / (sd / std::sqrt(static_cast<double>(n)));
    result.p_value = student_t_two_tailed_p(result.t_statistic, result.df);
    return result;
}

double student_t_two_tailed_p(double t, long long df) {
    if (df < 1) throw std::invalid_argument("student_t_two_tailed_p: df must be >= 1");
    if (t == 0.0) return 1.0;
    if (std::isinf(t)) return 0.0;
    const auto v = static_cast<double>(df);
    const double x = v / (v + t * t);
    const double p = regularized_incomplete_beta(v / 2.0, 0.5, x);
    return std::clamp(p, 0.0, 1.0);
}

std::vector<std::pair<std::string, double>> mean_ranks(const ScoreMatrix& m) {
    m.validate();
    const auto n_methods = static_cast<Eigen::Index>(m.methods.size());
    Eigen::VectorXd rank_sum = Eigen::VectorXd::Zero(n_methods);

    for (Eigen::Index row = 0; row < static_cast<Eigen::Index>(m.datasets.size()); ++row) {
        // Scores compare at the 3-decimal precision they are reported with,
        // so printed ties really share a rank.
        std::vector<long long> keys(static_cast<std::size_t>(n_methods));
        for (Eigen::Index j = 0; j < n_methods; ++j) {
            keys[static_cast<std::size_t>(j)] = std::llround(m.scores(row, j) * 1000.0);
        }
        std::vector<Eigen::Index> order(static_cast<std::size_t>(n_methods));
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
            return keys[static_cast<std::size_t>(a)] > keys[static_cast<std::size_t>(b)];
        });
        std::size_t pos = 0;
        while (pos < order.size()) {
            std::size_t end = pos;
            while (end + 1 < order.size() &&
                   keys[static_cast<std::size_t>(order[end + 1])] ==
                       keys[static_cast<std::size_t>(order[pos])]) {
                ++end;
            }
            // Positions pos..end (0-based) tie; they share the average of
            // ranks pos+1..end+1.
            const double shared =
                (static_cast<double>(pos + 1) + static_cast<double>(end + 1)) / 2.0;
            for (std::size_t k = pos; k <= end; ++k) rank_sum[order[k]] += shared;
            pos = end + 1;
        }
    }

    std::vector<std::pair<std::string, double>> out;
    for (Eigen::Index j = 0; j < n_methods; ++j) {
        out.emplace_back(m.methods[static_cast<std::size_t>(j)],
                         rank_sum[j] / static_cast<double>(m.datasets.size()));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return a.second < b.second; });
    return out;
}

MeanScores mean_scores(const ScoreMatrix& m) {
    m.validate();
    MeanScores out;
    for (Eigen::Index j = 0; j < m.scores.cols(); ++j) out.per_method.push_back(m.scores.col(j).mean());
    for (Eigen::Index i = 0; i < m.scores.rows(); ++i) out.per_dataset.push_back(m.scores.row(i).mean());
    return out;
}

ScoreMatrix load_score_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_score_matrix(" + path + "): cannot open file");

    std::vector<std::string> header;
    if (!read_csv_record(in, header) || header.size() < 2) {
        throw std::runtime_error("load_score_matrix(" + path + "): missing header row");
    }

    ScoreMatrix m;
    for (std::size_t j = 1; j < header.size(); ++j) m.methods.push_back(header[j]);

    std::vector<std::vector<double>> rows;
    std::vector<std::string> record;
    while (read_csv_record(in, record)) {
        if (record.size() == 1 && record[0].empty()) continue;
        if (record.size() != header.size()) {
            throw std::runtime_error("load_score_matrix(" + path + "): row " +
                                     std::to_string(rows.size() + 1) + " has " +
                                     std::to_string(record.size()) + " cells, expected " +
                                     std::to_string(header.size()));
        }
        m.datasets.push_back(record[0]);
        std::vector<double> values;
        for (std::size_t j = 1; j < record.size(); ++j) {
            const auto v = parse_double(record[j]);
            if (!v) {
                throw std::runtime_error("load_score_matrix(" + path + "): cell \"" + record[j] +
                                         "\" in row " + std::to_string(rows.size() + 1) +
                                         " is not a number");
            }
            values.push_back(*v);
        }
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw std::runtime_error("load_score_matrix(" + path + "): no data rows");

    m.scores.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(m.methods.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            m.scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    m.validate();
    return m;
}

void save_score_matrix(const ScoreMatrix& m, const std::string& path) {
    m.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_score_matrix(" + path + "): cannot open for writing");
    std::vector<std::string> fields{"dataset"};
    fields.insert(fields.end(), m.methods.begin(), m.methods.end());
    out << join_csv(fields) << "\n";
    for (std::size_t i = 0; i < m.datasets.size(); ++i) {
        fields.assign(1, m.datasets[i]);
        for (Eigen::Index j = 0; j < m.scores.cols(); ++j) {
            fields.push_back(double_to_string(m.scores(static_cast<Eigen::Index>(i), j)));
        }
        out << join_csv(fields) << "\n";
    }
    if (!out) throw std::runtime_error("save_score_matrix(" + path + "): write failed");
}

} // namespace mabprune
