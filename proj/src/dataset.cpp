#include "mabprune/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "mabprune/csv.hpp"

namespace mabprune {

void Dataset::validate() const {
    if (features.rows() != labels.size()) {
        throw std::invalid_argument("Dataset: feature rows (" + std::to_string(features.rows()) +
                                    ") != label count (" + std::to_string(labels.size()) + ")");
    }
    if (n_classes < 2) {
        throw std::invalid_argument("Dataset: n_classes must be >= 2, got " + std::to_string(n_classes));
    }
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= n_classes) {
            throw std::invalid_argument("Dataset: label " + std::to_string(labels[i]) +
                                        " at row " + std::to_string(i) + " outside [0, " +
                                        std::to_string(n_classes) + ")");
        }
    }
    if (!feature_names.empty() &&
        static_cast<Eigen::Index>(feature_names.size()) != features.cols()) {
        throw std::invalid_argument("Dataset: feature_names size != feature columns");
    }
}

Dataset Dataset::select_rows(const std::vector<Eigen::Index>& idx) const {
    Dataset out;
    out.features.resize(static_cast<Eigen::Index>(idx.size()), features.cols());
    out.labels.resize(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const Eigen::Index i = idx[k];
        if (i < 0 || i >= features.rows()) {
            throw std::out_of_range("Dataset::select_rows: index " + std::to_string(i));
        }
        out.features.row(static_cast<Eigen::Index>(k)) = features.row(i);
        out.labels[static_cast<Eigen::Index>(k)] = labels[i];
    }
    out.feature_names = feature_names;
    out.n_classes = n_classes;
    out.leak_guard = leak_guard;
    return out;
}

namespace {

std::runtime_error load_error(const std::string& path, const std::string& what) {
    return std::runtime_error("load_csv(" + path + "): " + what);
}

} // namespace

Dataset load_csv(const std::string& path, const std::string& target_column,
                 const std::optional<std::string>& positive_label) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw load_error(path, "cannot open file");

    std::vector<std::string> header;
    if (!read_csv_record(in, header) || header.empty()) {
        throw load_error(path, "empty file (no header row)");
    }

    Eigen::Index target_idx = -1;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == target_column) {
            target_idx = static_cast<Eigen::Index>(j);
            break;
        }
    }
    if (target_idx < 0) {
        throw load_error(path, "target column \"" + target_column + "\" not found in header");
    }

    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> record;
    while (read_csv_record(in, record)) {
        if (record.size() == 1 && record[0].empty()) continue;  // blank trailing line
        if (record.size() != header.size()) {
            throw load_error(path, "row " + std::to_string(rows.size() + 1) + " has " +
                                       std::to_string(record.size()) + " cells, expected " +
                                       std::to_string(header.size()));
        }
        rows.push_back(record);
    }
    if (rows.empty()) throw load_error(path, "no data rows");

    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            if (rows[i][j].empty()) {
                throw load_error(path, "missing value at row " + std::to_string(i + 1) +
                                           ", column \"" + header[j] + "\"");
            }
        }
    }

    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index d = static_cast<Eigen::Index>(header.size()) - 1;

    Dataset data;
    data.features.resize(n, d);
    data.labels.resize(n);

    Eigen::Index out_col = 0;
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(header.size()); ++j) {
        if (j == target_idx) continue;
        data.feature_names.push_back(header[static_cast<std::size_t>(j)]);
        bool numeric = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!parse_double(rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])) {
                numeric = false;
                break;
            }
        }
        if (numeric) {
            for (Eigen::Index i = 0; i < n; ++i) {
                data.features(i, out_col) =
                    *parse_double(rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
            }
        } else {
            // Label-encode in first appearance order.
            std::unordered_map<std::string, double> codes;
            for (Eigen::Index i = 0; i < n; ++i) {
                const std::string& cell = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                auto [it, inserted] = codes.try_emplace(cell, static_cast<double>(codes.size()));
                data.features(i, out_col) = it->second;
            }
        }
        ++out_col;
    }

    std::map<std::string, int> class_index;
    if (positive_label) {
        std::set<std::string> distinct;
        for (Eigen::Index i = 0; i < n; ++i) {
            distinct.insert(rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(target_idx)]);
        }
        if (distinct.size() > 2) {
            throw load_error(path, "positive_label given but target has " +
                                       std::to_string(distinct.size()) + " distinct values");
        }
        if (!distinct.count(*positive_label)) {
            throw load_error(path, "positive_label \"" + *positive_label + "\" never occurs in target");
        }
        for (const auto& v : distinct) class_index[v] = (v == *positive_label) ? 1 : 0;
        data.n_classes = 2;
    } else {
        std::set<std::string> distinct;
        for (Eigen::Index i = 0; i < n; ++i) {
            distinct.insert(rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(target_idx)]);
        }
        if (distinct.size() < 2) throw load_error(path, "target column has a single class");
        std::vector<std::string> ordered(distinct.begin(), distinct.end());
        const bool all_int = std::all_of(ordered.begin(), ordered.end(),
                                         [](const std::string& s) { return parse_integer(s).has_value(); });
        if (all_int) {
            std::sort(ordered.begin(), ordered.end(), [](const std::string& a, const std::string& b) {
                return *parse_integer(a) < *parse_integer(b);
            });
        }
        for (std::size_t k = 0; k < ordered.size(); ++k) class_index[ordered[k]] = static_cast<int>(k);
        data.n_classes = static_cast<int>(ordered.size());
    }

    for (Eigen::Index i = 0; i < n; ++i) {
        data.labels[i] =
            class_index.at(rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(target_idx)]);
    }

    data.validate();
    return data;
}

void save_csv(const Dataset& data, const std::string& path, const std::string& target_column) {
    data.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_csv(" + path + "): cannot open file for writing");

    std::vector<std::string> header = data.feature_names;
    if (header.empty()) {
        for (Eigen::Index j = 0; j < data.n_features(); ++j) header.push_back("f" + std::to_string(j));
    }
    header.push_back(target_column);
    out << join_csv(header) << "\n";

    std::vector<std::string> fields;
    for (Eigen::Index i = 0; i < data.n_rows(); ++i) {
        fields.clear();
        for (Eigen::Index j = 0; j < data.n_features(); ++j) {
            fields.push_back(double_to_string(data.features(i, j)));
        }
        fields.push_back(std::to_string(data.labels[i]));
        out << join_csv(fields) << "\n";
    }
    if (!out) throw std::runtime_error("save_csv(" + path + "): write failed");
}

std::pair<Dataset, Dataset> split(const Dataset& data, const SplitSpec& spec) {
    data.validate();
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
        throw std::invalid_argument("split: train_fraction must be in (0, 1)");
    }
    const Eigen::Index n = data.n_rows();
    if (n == 0) throw std::invalid_argument("split: empty dataset");

    std::vector<std::vector<Eigen::Index>> by_class(static_cast<std::size_t>(data.n_classes));
    for (Eigen::Index i = 0; i < n; ++i) by_class[static_cast<std::size_t>(data.labels[i])].push_back(i);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        if (by_class[c].size() < 2) {
            throw std::invalid_argument("split: class " + std::to_string(c) + " has " +
                                        std::to_string(by_class[c].size()) +
                                        " samples; need at least 2 to stratify");
        }
    }

    // Largest-remainder apportionment of train seats across classes so the
    // train side totals round(train_fraction * n) exactly.
    const auto total_train =
        static_cast<Eigen::Index>(std::llround(spec.train_fraction * static_cast<double>(n)));
    std::vector<Eigen::Index> quota(by_class.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    Eigen::Index assigned = 0;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        const double exact = spec.train_fraction * static_cast<double>(by_class[c].size());
        quota[c] = static_cast<Eigen::Index>(std::floor(exact));
        assigned += quota[c];
        remainders.emplace_back(exact - std::floor(exact), c);
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::size_t k = 0; assigned < total_train && k < remainders.size(); ++k) {
        ++quota[remainders[k].second];
        ++assigned;
    }

    Rng rng = make_rng(spec.seed);
    std::vector<Eigen::Index> train_idx;
    std::vector<Eigen::Index> test_idx;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& idx = by_class[c];
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t k = 0; k < idx.size(); ++k) {
            if (static_cast<Eigen::Index>(k) < quota[c]) train_idx.push_back(idx[k]);
            else test_idx.push_back(idx[k]);
        }
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    return {data.select_rows(train_idx), data.select_rows(test_idx)};
}

Dataset sample_subset(const Dataset& data, double fraction, Eigen::Index floor_rows, Rng& rng) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw std::invalid_argument("sample_subset: fraction must be in (0, 1]");
    }
    if (floor_rows < 1) throw std::invalid_argument("sample_subset: floor must be positive");
    const Eigen::Index n = data.n_rows();
    if (n == 0) throw std::invalid_argument("sample_subset: empty dataset");

    const auto wanted =
        static_cast<Eigen::Index>(std::llround(fraction * static_cast<double>(n)));
    const Eigen::Index k = std::min(n, std::max(floor_rows, wanted));

    // Partial Fisher-Yates: the first k slots end up a uniform sample.
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    for (Eigen::Index i = 0; i < k; ++i) {
        std::uniform_int_distribution<Eigen::Index> pick(i, n - 1);
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
    }
    idx.resize(static_cast<std::size_t>(k));
    std::sort(idx.begin(), idx.end());
    return data.select_rows(idx);
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
    if (spec.n_samples < 2) throw std::invalid_argument("generate_synthetic: need n_samples >= 2");
    if (spec.n_features < 1) throw std::invalid_argument("generate_synthetic: need n_features >= 1");
    if (spec.n_informative < 0 || spec.n_informative > spec.n_features) {
        throw std::invalid_argument("generate_synthetic: n_informative must be in [0, n_features]");
    }
    if (!(spec.class_separation >= 0.0)) {
        throw std::invalid_argument("generate_synthetic: class_separation must be nonnegative");
    }
    if (!(spec.label_noise >= 0.0 && spec.label_noise < 0.5)) {
        throw std::invalid_argument("generate_synthetic: label_noise must be in [0, 0.5)");
    }

    Dataset data;
    data.features.resize(spec.n_samples, spec.n_features);
    data.labels.resize(spec.n_samples);
    data.n_classes = 2;
    for (Eigen::Index j = 0; j < spec.n_features; ++j) data.feature_names.push_back("f" + std::to_string(j));

    // Feature and flip streams are independent so the same seed with
    // label_noise = 0 reproduces the pre-noise data exactly.
    Rng feature_rng = make_rng(spec.seed, 0);
    Rng flip_rng = make_rng(spec.seed, 1);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const double offset = spec.class_separation / 2.0;
    for (Eigen::Index i = 0; i < spec.n_samples; ++i) {
        const int base_label = static_cast<int>(i % 2);
        const double mean = base_label == 1 ? offset : -offset;
        for (Eigen::Index j = 0; j < spec.n_features; ++j) {
            const double center = (j < spec.n_informative) ? mean : 0.0;
            data.features(i, j) = center + gauss(feature_rng);
        }
        int label = base_label;
        if (spec.label_noise > 0.0 && unit(flip_rng) < spec.label_noise) label = 1 - label;
        data.labels[i] = label;
    }
    return data;
}

} // namespace mabprune
