#include "mabprune/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "mabprune/ccp.hpp"
#include "mabprune/csv.hpp"
#include "mabprune/pruner.hpp"

namespace mabprune {

using nlohmann::json;

namespace {

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

// paired_t_test rejects identical columns; map that case to a marked row.
TTestResult tolerant_paired_t_test(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if ((b - a).cwiseAbs().maxCoeff() == 0.0) {
        TTestResult r;
        r.df = a.size() - 1;
        r.identical_scores = true;
        return r;
    }
    return paired_t_test(a, b);
}

void run_job(const RunConfig& cfg, const Dataset& data, std::size_t dataset_index,
             const std::string& method, std::uint64_t seed, CellResult& cell) {
    const std::uint64_t base = derive_seed(seed, dataset_index);

    SplitSpec split_spec;
    split_spec.train_fraction = cfg.split.train_fraction;
    split_spec.seed = derive_seed(base, 0);
    auto [train, test] = split(data, split_spec);
    test.leak_guard = true;  // tripwire: any evaluation before final assessment throws

    const DecisionTree tree = fit(train, cfg.tree, derive_seed(base, 1));

    DecisionTree final_tree = tree.clone();
    if (method == "unpruned") {
        // keep the fitted tree
    } else if (method == "ccp") {
        CcpOutcome outcome = ccp_prune_detailed(tree, train, cfg.ccp_folds, cfg.prune.weights,
                                                derive_seed(base, 2), cfg.prune.positive_class);
        final_tree = std::move(outcome.pruned_tree);
        cell.chosen_alpha = outcome.chosen_alpha;
    } else {
        PruneConfig pc = cfg.prune_for(method);
        // Stream index keyed by the canonical method table, so adding or
        // reordering config methods never shifts another method's draw.
        pc.seed = derive_seed(base, 3 + canonical_method_index(method));
        PruneOutcome outcome = mab_prune(tree, train, pc);
        final_tree = std::move(outcome.pruned_tree);
        cell.rounds_executed = outcome.rounds_executed;
        cell.chosen_cut = outcome.chosen_cut;
    }

    Dataset final_test = test;
    final_test.leak_guard = false;  // final assessment may now see the held-out split
    cell.test_eval = evaluate(final_tree, final_test, cfg.prune.positive_class);
    cell.performance_score = performance(cell.test_eval, cfg.prune.weights);
    cell.node_count = final_tree.node_count();
    cell.leaf_count = final_tree.leaf_count();
    cell.tree_depth = final_tree.max_depth();
    cell.ok = true;
}

} // namespace

BenchmarkReport run_benchmark(const RunConfig& cfg) {
    cfg.validate();

    const std::size_t n_datasets = cfg.datasets.size();
    const std::size_t n_methods = cfg.methods.size();
    const std::size_t n_seeds = cfg.seeds.size();

    // Materialize every dataset once; jobs share them read-only.
    std::vector<Dataset> loaded(n_datasets);
    std::vector<std::string> load_errors(n_datasets);
    for (std::size_t d = 0; d < n_datasets; ++d) {
        const DatasetConfig& dc = cfg.datasets[d];
        try {
            loaded[d] = dc.synthetic ? generate_synthetic(*dc.synthetic)
                                     : load_csv(dc.path, dc.target_column, dc.positive_label);
        } catch (const std::exception& e) {
            load_errors[d] = e.what();
        }
    }

    const std::size_t total = n_datasets * n_methods * n_seeds;
    BenchmarkReport report;
    report.cells.resize(total);

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= total) return;
            const std::size_t d = k / (n_methods * n_seeds);
            const std::size_t m = (k / n_seeds) % n_methods;
            const std::size_t s = k % n_seeds;
            CellResult& cell = report.cells[k];
            cell.dataset = cfg.datasets[d].name;
            cell.method = cfg.methods[m];
            cell.seed = cfg.seeds[s];
            const auto start = std::chrono::steady_clock::now();
            if (!load_errors[d].empty()) {
                cell.error = load_errors[d];
            } else {
                try {
                    run_job(cfg, loaded[d], d, cfg.methods[m], cfg.seeds[s], cell);
                } catch (const std::exception& e) {
                    cell.ok = false;
                    cell.error = e.what();
                }
            }
            cell.runtime_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
    };

    int n_threads = cfg.jobs > 0 ? cfg.jobs : static_cast<int>(std::thread::hardware_concurrency());
    n_threads = std::max(1, std::min<int>(n_threads, static_cast<int>(total)));
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();

    // Seed-averaged matrix over fully successful datasets.
    std::vector<std::size_t> ok_datasets;
    for (std::size_t d = 0; d < n_datasets; ++d) {
        bool all_ok = true;
        for (std::size_t m = 0; m < n_methods && all_ok; ++m) {
            for (std::size_t s = 0; s < n_seeds && all_ok; ++s) {
                all_ok = report.cells[(d * n_methods + m) * n_seeds + s].ok;
            }
        }
        if (all_ok) ok_datasets.push_back(d);
        else report.failed_datasets.push_back(cfg.datasets[d].name);
    }

    report.matrix.methods = cfg.methods;
    report.matrix.scores.resize(static_cast<Eigen::Index>(ok_datasets.size()),
                                static_cast<Eigen::Index>(n_methods));
    for (std::size_t row = 0; row < ok_datasets.size(); ++row) {
        const std::size_t d = ok_datasets[row];
        report.matrix.datasets.push_back(cfg.datasets[d].name);
        for (std::size_t m = 0; m < n_methods; ++m) {
            double sum = 0.0;
            for (std::size_t s = 0; s < n_seeds; ++s) {
                sum += report.cells[(d * n_methods + m) * n_seeds + s].performance_score;
            }
            report.matrix.scores(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(m)) =
                sum / static_cast<double>(n_seeds);
        }
    }

    if (!report.matrix.datasets.empty()) {
        report.ranks = mean_ranks(report.matrix);
        if (report.matrix.datasets.size() >= 2) {
            for (const std::string& baseline : {std::string("unpruned"), std::string("ccp")}) {
                const Eigen::Index b = report.matrix.method_index(baseline);
                if (b < 0) continue;
                auto& rows = baseline == "unpruned" ? report.vs_unpruned : report.vs_ccp;
                for (std::size_t m = 0; m < n_methods; ++m) {
                    if (!is_mab_method(cfg.methods[m])) continue;
                    rows.emplace_back(cfg.methods[m],
                                      tolerant_paired_t_test(report.matrix.scores.col(b),
                                                             report.matrix.scores.col(
                                                                 static_cast<Eigen::Index>(m))));
                }
            }
        }
    }
    return report;
}

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path);
}

void write_ttest_tables(const ScoreMatrix& matrix, const std::string& baseline,
                        const std::string& out_dir) {
    const Eigen::Index b = matrix.method_index(baseline);
    if (b < 0) return;  // no such column, no table

    const MeanScores means = mean_scores(matrix);
    const bool enough_pairs = matrix.datasets.size() >= 2;

    std::string csv = "method,mean_score,improvement_pct,t_statistic,p_value,status\n";
    std::string md = "# Paired t-tests vs " + baseline + "\n\n";
    md += "| Method | Mean score | Improvement | t | p |\n";
    md += "|--------|-----------:|------------:|--:|--:|\n";

    for (std::size_t m = 0; m < matrix.methods.size(); ++m) {
        const std::string& method = matrix.methods[m];
        if (!is_mab_method(method)) continue;
        const double mean_score = means.per_method[m];
        if (!enough_pairs) {
            csv += join_csv({method, double_to_string(mean_score), "", "", "",
                             "insufficient_pairs"}) + "\n";
            md += "| " + method + " | " + fixed(mean_score, 4) +
                  " | insufficient pairs | — | — |\n";
            continue;
        }
        const TTestResult r = tolerant_paired_t_test(matrix.scores.col(b),
                                                     matrix.scores.col(static_cast<Eigen::Index>(m)));
        if (r.identical_scores) {
            csv += join_csv({method, double_to_string(mean_score), "0", "", "",
                             "identical_scores"}) + "\n";
            md += "| " + method + " | " + fixed(mean_score, 4) +
                  " | 0.00% | identical scores | — |\n";
            continue;
        }
        csv += join_csv({method, double_to_string(mean_score),
                         double_to_string(r.mean_improvement_pct),
                         double_to_string(r.t_statistic), double_to_string(r.p_value),
                         r.zero_variance ? "zero_variance" : "ok"}) + "\n";
        md += "| " + method + " | " + fixed(mean_score, 4) + " | " +
              fixed(r.mean_improvement_pct, 2) + "% | " + fixed(r.t_statistic, 4) + " | " +
              fixed(r.p_value, 4) + " |\n";
    }
    if (!enough_pairs) {
        md += "\nPaired t-tests need at least 2 datasets.\n";
    }
    write_text(out_dir + "/ttest_vs_" + baseline + ".csv", csv);
    write_text(out_dir + "/ttest_vs_" + baseline + ".md", md);
}

} // namespace

void write_stats_files(const ScoreMatrix& matrix, const std::string& out_dir) {
    matrix.validate();
    std::filesystem::create_directories(out_dir);

    const auto ranks = mean_ranks(matrix);
    std::string csv = "method,mean_rank\n";
    std::string md = "# Mean ranks\n\n| Method | Mean rank |\n|--------|----------:|\n";
    for (const auto& [method, rank] : ranks) {
        csv += join_csv({method, double_to_string(rank)}) + "\n";
        md += "| " + method + " | " + fixed(rank, 2) + " |\n";
    }
    write_text(out_dir + "/mean_ranks.csv", csv);
    write_text(out_dir + "/mean_ranks.md", md);

    write_ttest_tables(matrix, "unpruned", out_dir);
    write_ttest_tables(matrix, "ccp", out_dir);
}

namespace {

json ttest_rows_json(const std::vector<std::pair<std::string, TTestResult>>& rows) {
    json arr = json::array();
    for (const auto& [method, r] : rows) {
        json row;
        row["method"] = method;
        row["df"] = r.df;
        if (r.identical_scores) {
            row["status"] = "identical_scores";
        } else {
            row["status"] = r.zero_variance ? "zero_variance" : "ok";
            row["t_statistic"] = r.zero_variance ? json(r.t_statistic > 0 ? "inf" : "-inf")
                                                 : json(r.t_statistic);
            row["p_value"] = r.p_value;
            row["mean_improvement_pct"] = r.mean_improvement_pct;
        }
        arr.push_back(row);
    }
    return arr;
}

json config_echo(const RunConfig& cfg) {
    json datasets = json::array();
    for (const DatasetConfig& d : cfg.datasets) {
        json entry;
        entry["name"] = d.name;
        if (d.synthetic) {
            entry["synthetic"] = {{"n_samples", d.synthetic->n_samples},
                                  {"n_features", d.synthetic->n_features},
                                  {"n_informative", d.synthetic->n_informative},
                                  {"class_separation", d.synthetic->class_separation},
                                  {"label_noise", d.synthetic->label_noise},
                                  {"seed", d.synthetic->seed}};
        } else {
            entry["path"] = d.path;
            entry["target"] = d.target_column;
            if (d.positive_label) entry["positive_label"] = *d.positive_label;
        }
        datasets.push_back(entry);
    }
    json prune;
    prune["rounds"] = cfg.prune.rounds;
    prune["min_prune_depth"] = cfg.prune.min_prune_depth;
    prune["eval_fraction"] = cfg.prune.eval_fraction;
    prune["eval_floor"] = static_cast<long long>(cfg.prune.eval_floor);
    prune["fixed_eval_subset"] = cfg.prune.fixed_eval_subset;
    prune["positive_class"] = cfg.prune.positive_class;
    prune["weights"] = {{"alpha", cfg.prune.weights.alpha},
                        {"beta", cfg.prune.weights.beta},
                        {"gamma", cfg.prune.weights.gamma}};
    prune["reward"] = {{"threshold", cfg.prune.reward.threshold},
                       {"delta_max", cfg.prune.reward.delta_max}};
    prune["temperature"] = cfg.prune.policy.temperature;

    json echo;
    echo["datasets"] = datasets;
    echo["methods"] = cfg.methods;
    echo["seeds"] = cfg.seeds;
    echo["split"] = {{"train_fraction", cfg.split.train_fraction}};
    echo["tree"] = {{"max_depth", cfg.tree.max_depth},
                    {"min_samples_leaf", cfg.tree.min_samples_leaf},
                    {"min_samples_split", cfg.tree.min_samples_split}};
    echo["prune"] = prune;
    echo["ccp"] = {{"folds", cfg.ccp_folds}};
    return echo;
}

} // namespace

void write_report_files(const BenchmarkReport& report, const RunConfig& cfg,
                        const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);

    if (!report.matrix.datasets.empty()) {
        save_score_matrix(report.matrix, out_dir + "/scores.csv");
        write_stats_files(report.matrix, out_dir);
    }

    std::string per_seed =
        "dataset,method,seed,performance,accuracy,scaled_log_loss,f1,nodes,leaves,depth,status,"
        "error\n";
    std::string telemetry = "dataset,method,seed,runtime_seconds\n";
    for (const CellResult& cell : report.cells) {
        if (cell.ok) {
            per_seed += join_csv({cell.dataset, cell.method, std::to_string(cell.seed),
                                  double_to_string(cell.performance_score),
                                  double_to_string(cell.test_eval.accuracy),
                                  double_to_string(cell.test_eval.scaled_log_loss),
                                  double_to_string(cell.test_eval.f1),
                                  std::to_string(cell.node_count),
                                  std::to_string(cell.leaf_count),
                                  std::to_string(cell.tree_depth), "ok", ""}) + "\n";
        } else {
            per_seed += join_csv({cell.dataset, cell.method, std::to_string(cell.seed), "", "", "",
                                  "", "", "", "", "error", cell.error}) + "\n";
        }
        telemetry += join_csv({cell.dataset, cell.method, std::to_string(cell.seed),
                               double_to_string(cell.runtime_seconds)}) + "\n";
    }
    write_text(out_dir + "/scores_per_seed.csv", per_seed);
    write_text(out_dir + "/telemetry.csv", telemetry);

    json cells = json::array();
    for (const CellResult& cell : report.cells) {
        json c;
        c["dataset"] = cell.dataset;
        c["method"] = cell.method;
        c["seed"] = cell.seed;
        c["status"] = cell.ok ? "ok" : "error";
        if (cell.ok) {
            c["performance"] = cell.performance_score;
            c["accuracy"] = cell.test_eval.accuracy;
            c["scaled_log_loss"] = cell.test_eval.scaled_log_loss;
            c["f1"] = cell.test_eval.f1;
            c["nodes"] = static_cast<long long>(cell.node_count);
            c["leaves"] = static_cast<long long>(cell.leaf_count);
            c["depth"] = cell.tree_depth;
            if (is_mab_method(cell.method)) {
                c["rounds_executed"] = cell.rounds_executed;
                c["chosen_cut"] = cell.chosen_cut;
            }
            if (cell.method == "ccp") c["chosen_alpha"] = cell.chosen_alpha;
        } else {
            c["error"] = cell.error;
        }
        cells.push_back(c);
    }

    json root;
    root["config"] = config_echo(cfg);
    root["cells"] = cells;
    root["failed_datasets"] = report.failed_datasets;
    if (!report.matrix.datasets.empty()) {
        json matrix;
        matrix["datasets"] = report.matrix.datasets;
        matrix["methods"] = report.matrix.methods;
        json rows = json::array();
        for (Eigen::Index i = 0; i < report.matrix.scores.rows(); ++i) {
            json row = json::array();
            for (Eigen::Index j = 0; j < report.matrix.scores.cols(); ++j) {
                row.push_back(report.matrix.scores(i, j));
            }
            rows.push_back(row);
        }
        matrix["scores"] = rows;
        root["matrix"] = matrix;

        json ranks = json::array();
        for (const auto& [method, rank] : report.ranks) {
            ranks.push_back({{"method", method}, {"mean_rank", rank}});
        }
        root["mean_ranks"] = ranks;
        root["ttest_vs_unpruned"] = ttest_rows_json(report.vs_unpruned);
        root["ttest_vs_ccp"] = ttest_rows_json(report.vs_ccp);
    }
    write_text(out_dir + "/report.json", root.dump(2) + "\n");
}

} // namespace mabprune
