// Command-line front end: train, prune, benchmark, report, export.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mabprune/benchmark.hpp"
#include "mabprune/ccp.hpp"
#include "mabprune/config.hpp"
#include "mabprune/csv.hpp"
#include "mabprune/metrics.hpp"
#include "mabprune/pruner.hpp"
#include "mabprune/stats.hpp"
#include "mabprune/tree.hpp"

namespace {

using nlohmann::json;
using namespace mabprune;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct CliOptions {
    std::string config_path;
    std::string out_dir;  // overrides config output_dir when set
    std::string dataset;
    std::string method;
    std::string scores_path;
    long long seed = -1;  // overrides the config seed list when >= 0
    int jobs = -1;
};

std::size_t dataset_index_or_throw(const RunConfig& cfg, const std::string& name) {
    for (std::size_t d = 0; d < cfg.datasets.size(); ++d) {
        if (cfg.datasets[d].name == name) return d;
    }
    throw ConfigError("unknown dataset \"" + name + "\"");
}

Dataset load_dataset(const DatasetConfig& dc) {
    return dc.synthetic ? generate_synthetic(*dc.synthetic)
                        : load_csv(dc.path, dc.target_column, dc.positive_label);
}

RunConfig load_config(const CliOptions& opt) {
    if (opt.config_path.empty()) throw ConfigError("--config is required for this command");
    RunConfig cfg = load_run_config(opt.config_path);
    if (!opt.out_dir.empty()) cfg.output_dir = opt.out_dir;
    if (opt.seed >= 0) cfg.seeds = {static_cast<std::uint64_t>(opt.seed)};
    if (opt.jobs >= 0) cfg.jobs = opt.jobs;
    cfg.validate();
    return cfg;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path);
}

json eval_json(const EvalResult& e, const MetricWeights& w) {
    return {{"accuracy", e.accuracy},
            {"scaled_log_loss", e.scaled_log_loss},
            {"f1", e.f1},
            {"performance", performance(e, w)}};
}

// Splits, fits, and reports the shared seed plumbing of train/prune/export.
struct PreparedRun {
    std::uint64_t seed = 0;
    std::uint64_t base = 0;
    Dataset train;
    Dataset test;
    DecisionTree tree;
};

PreparedRun prepare(const RunConfig& cfg, std::size_t dataset_index) {
    const std::uint64_t seed = cfg.seeds.front();
    const std::uint64_t base = derive_seed(seed, dataset_index);
    const Dataset data = load_dataset(cfg.datasets[dataset_index]);

    SplitSpec split_spec;
    split_spec.train_fraction = cfg.split.train_fraction;
    split_spec.seed = derive_seed(base, 0);
    auto [train, test] = split(data, split_spec);
    test.leak_guard = true;

    DecisionTree tree = fit(train, cfg.tree, derive_seed(base, 1));
    return PreparedRun{seed, base, std::move(train), std::move(test), std::move(tree)};
}

int cmd_train(const CliOptions& opt) {
    const RunConfig cfg = load_config(opt);
    const std::size_t d = dataset_index_or_throw(cfg, opt.dataset);
    PreparedRun run = prepare(cfg, d);

    std::filesystem::create_directories(cfg.output_dir);
    const std::string tree_file = cfg.output_dir + "/" + opt.dataset + "_tree.txt";
    write_file(tree_file, serialize_tree(run.tree));

    Dataset final_test = run.test;
    final_test.leak_guard = false;  // this summary is the artifact's final assessment
    json summary;
    summary["dataset"] = opt.dataset;
    summary["seed"] = run.seed;
    summary["tree"] = {{"max_depth", cfg.tree.max_depth},
                       {"min_samples_leaf", cfg.tree.min_samples_leaf},
                       {"min_samples_split", cfg.tree.min_samples_split},
                       {"nodes", static_cast<long long>(run.tree.node_count())},
                       {"leaves", static_cast<long long>(run.tree.leaf_count())},
                       {"depth", run.tree.max_depth()}};
    summary["train"] = eval_json(evaluate(run.tree, run.train, cfg.prune.positive_class),
                                 cfg.prune.weights);
    summary["test"] = eval_json(evaluate(run.tree, final_test, cfg.prune.positive_class),
                                cfg.prune.weights);
    summary["tree_file"] = tree_file;
    write_file(cfg.output_dir + "/" + opt.dataset + "_train_summary.json",
               summary.dump(2) + "\n");
    std::cout << "wrote " << tree_file << "\n";
    return kExitOk;
}

int cmd_prune(const CliOptions& opt) {
    const RunConfig cfg = load_config(opt);
    const std::size_t d = dataset_index_or_throw(cfg, opt.dataset);
    if (opt.method == "unpruned") throw ConfigError("method \"unpruned\" does not prune");
    canonical_method_index(opt.method);  // rejects unknown names
    PreparedRun run = prepare(cfg, d);

    std::filesystem::create_directories(cfg.output_dir);
    const std::string stem = cfg.output_dir + "/" + opt.dataset + "_" + opt.method;

    // The outcome artifact carries train-side information only; the held-out
    // split stays guarded here.
    json outcome;
    outcome["dataset"] = opt.dataset;
    outcome["method"] = opt.method;
    outcome["seed"] = run.seed;
    if (opt.method == "ccp") {
        CcpOutcome result = ccp_prune_detailed(run.tree, run.train, cfg.ccp_folds,
                                               cfg.prune.weights, derive_seed(run.base, 2),
                                               cfg.prune.positive_class);
        json path = json::array();
        for (const CcpPathEntry& entry : result.path) {
            path.push_back({{"alpha", entry.alpha},
                            {"n_leaves", static_cast<long long>(entry.n_leaves)}});
        }
        json cv = json::array();
        for (const auto& [alpha, score] : result.cv_scores) {
            cv.push_back({{"alpha", alpha}, {"mean_performance", score}});
        }
        outcome["alpha_path"] = path;
        outcome["cv_scores"] = cv;
        outcome["chosen_alpha"] = result.chosen_alpha;
        outcome["nodes"] = static_cast<long long>(result.pruned_tree.node_count());
        write_file(stem + "_tree.txt", serialize_tree(result.pruned_tree));
    } else {
        PruneConfig pc = cfg.prune_for(opt.method);
        pc.seed = derive_seed(run.base, 3 + canonical_method_index(opt.method));
        PruneOutcome result = mab_prune(run.tree, run.train, pc);
        json arms = json::array();
        for (const ArmRecord& arm : result.arm_table) {
            arms.push_back({{"node", arm.node},
                            {"plays", arm.plays},
                            {"mean_reward", arm.mean_reward},
                            {"wins", arm.wins},
                            {"losses", arm.losses}});
        }
        outcome["rounds"] = result.rounds_executed;
        outcome["arm_table"] = arms;
        outcome["chosen_cut"] = result.chosen_cut;
        outcome["pruned_node_ids"] = result.pruned_node_ids;
        outcome["best_performance"] = result.best_performance;
        outcome["nodes"] = static_cast<long long>(result.pruned_tree.node_count());
        write_file(stem + "_tree.txt", serialize_tree(result.pruned_tree));
    }
    outcome["tree_file"] = stem + "_tree.txt";
    write_file(stem + "_outcome.json", outcome.dump(2) + "\n");
    std::cout << "wrote " << stem << "_outcome.json\n";
    return kExitOk;
}

int cmd_benchmark(const CliOptions& opt) {
    const RunConfig cfg = load_config(opt);
    const BenchmarkReport report = run_benchmark(cfg);
    write_report_files(report, cfg, cfg.output_dir);
    std::cout << "wrote report files to " << cfg.output_dir << "\n";
    for (const std::string& name : report.failed_datasets) {
        std::cerr << "dataset \"" << name << "\" failed; see report.json\n";
    }
    return kExitOk;
}

int cmd_report(const CliOptions& opt) {
    const ScoreMatrix matrix = load_score_matrix(opt.scores_path);
    const std::string out = opt.out_dir.empty() ? std::string("out") : opt.out_dir;
    write_stats_files(matrix, out);
    std::cout << "wrote rank and t-test tables to " << out << "\n";
    return kExitOk;
}

int cmd_export(const CliOptions& opt) {
    const RunConfig cfg = load_config(opt);
    const std::size_t d = dataset_index_or_throw(cfg, opt.dataset);
    PreparedRun run = prepare(cfg, d);
    std::cout << serialize_tree(run.tree);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decision-tree pruning with multi-armed bandit policies"};
    app.require_subcommand(1);
    app.fallthrough();

    CliOptions opt;
    app.add_option("--config", opt.config_path, "Run configuration (JSON)");
    app.add_option("--seed", opt.seed, "Override the config seed list with one seed")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--jobs", opt.jobs, "Worker threads (benchmark)")->check(CLI::NonNegativeNumber);
    app.add_option("--out", opt.out_dir, "Output directory (overrides config)");

    CLI::App* train = app.add_subcommand("train", "Fit a tree on a dataset's train split");
    train->add_option("--dataset", opt.dataset, "Dataset name from the config")->required();

    CLI::App* prune = app.add_subcommand("prune", "Prune a fitted tree with one method");
    prune->add_option("--dataset", opt.dataset, "Dataset name from the config")->required();
    prune->add_option("--method", opt.method, "ccp or a bandit policy name")->required();

    app.add_subcommand("benchmark", "Run every (dataset, method, seed) job and emit reports");

    CLI::App* report = app.add_subcommand("report", "Rank/t-test tables from a score matrix CSV");
    report->add_option("--scores", opt.scores_path, "Score matrix CSV")->required();

    CLI::App* exp = app.add_subcommand("export", "Print a fitted tree's canonical serialization");
    exp->add_option("--dataset", opt.dataset, "Dataset name from the config")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (train->parsed()) return cmd_train(opt);
        if (prune->parsed()) return cmd_prune(opt);
        if (report->parsed()) return cmd_report(opt);
        if (exp->parsed()) return cmd_export(opt);
        return cmd_benchmark(opt);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
