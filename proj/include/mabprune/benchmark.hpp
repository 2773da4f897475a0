#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mabprune/config.hpp"
#include "mabprune/metrics.hpp"
#include "mabprune/stats.hpp"

namespace mabprune {

/// One (dataset, method, seed) job result. runtime_seconds goes only to the
/// telemetry file — every other report is byte-reproducible.
struct CellResult {
    std::string dataset;
    std::string method;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    EvalResult test_eval;
    double performance_score = 0.0;
    Eigen::Index node_count = 0;
    Eigen::Index leaf_count = 0;
    int tree_depth = 0;
    long long rounds_executed = 0;  // bandit methods
    std::size_t chosen_cut = 0;     // bandit methods
    double chosen_alpha = 0.0;      // ccp
    double runtime_seconds = 0.0;
};

struct BenchmarkReport {
    std::vector<CellResult> cells;  // dataset-major, then method, then seed
    // Seed-averaged matrix over the datasets whose cells all succeeded.
    ScoreMatrix matrix;
    std::vector<std::string> failed_datasets;
    std::vector<std::pair<std::string, double>> ranks;
    std::vector<std::pair<std::string, TTestResult>> vs_unpruned;
    std::vector<std::pair<std::string, TTestResult>> vs_ccp;
};

/// Runs every (dataset, method, seed) job on a worker pool and assembles the
/// statistics. A failing dataset is recorded and dropped from the matrix; it
/// does not abort the run.
BenchmarkReport run_benchmark(const RunConfig& cfg);

/// Writes scores.csv, scores_per_seed.csv, rank/t-test tables, report.json,
/// and telemetry.csv under out_dir.
void write_report_files(const BenchmarkReport& report, const RunConfig& cfg,
                        const std::string& out_dir);

/// Stats-only emission for an existing score matrix: mean_ranks.{csv,md} and
/// ttest_vs_{unpruned,ccp}.{csv,md} (a t-test table appears when its baseline
/// column exists).
void write_stats_files(const ScoreMatrix& matrix, const std::string& out_dir);

} // namespace mabprune
