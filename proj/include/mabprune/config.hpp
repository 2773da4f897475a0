#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mabprune/dataset.hpp"
#include "mabprune/pruner.hpp"
#include "mabprune/tree.hpp"

namespace mabprune {

/// Configuration mistakes (bad file, bad schema, unknown names). The CLI maps
/// these to the usage exit code.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct DatasetConfig {
    std::string name;
    // Exactly one source: a CSV file...
    std::string path;
    std::string target_column;
    std::optional<std::string> positive_label;
    // ...or a generated dataset.
    std::optional<SyntheticSpec> synthetic;
};

struct RunConfig {
    std::vector<DatasetConfig> datasets;
    std::vector<std::string> methods;
    std::vector<std::uint64_t> seeds;
    SplitSpec split;
    TreeHyperparams tree;
    // Pruning defaults; per-method overrides come pre-resolved.
    PruneConfig prune;
    std::map<std::string, PruneConfig> method_prune;
    int ccp_folds = 5;
    std::string output_dir = "out";
    int jobs = 0;  // 0 = one per hardware thread

    void validate() const;
    /// Resolved PruneConfig for a bandit method (policy kind already set).
    const PruneConfig& prune_for(const std::string& method) const;
};

/// Canonical method order; benchmark columns and seed streams follow it.
const std::vector<std::string>& known_methods();
bool is_mab_method(const std::string& method);
/// Position in known_methods(); throws ConfigError for unknown names.
std::size_t canonical_method_index(const std::string& method);
PolicyKind policy_from_method(const std::string& method);

/// Parses and validates a JSON run configuration. MABPRUNE_OUTPUT_DIR and
/// MABPRUNE_JOBS environment variables override their config keys.
RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& json_text, const std::string& context);

} // namespace mabprune
