#include "mabprune/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace mabprune {

using nlohmann::json;

const std::vector<std::string>& known_methods() {
    static const std::vector<std::string> methods{"unpruned", "ccp",      "ucb1",    "kl_ucb",
                                                  "thompson", "bayes_ucb", "softmax", "wsls"};
    return methods;
}

bool is_mab_method(const std::string& method) {
    return method != "unpruned" && method != "ccp" &&
           std::find(known_methods().begin(), known_methods().end(), method) !=
               known_methods().end();
}

std::size_t canonical_method_index(const std::string& method) {
    const auto& all = known_methods();
    const auto it = std::find(all.begin(), all.end(), method);
    if (it == all.end()) throw ConfigError("unknown method \"" + method + "\"");
    return static_cast<std::size_t>(it - all.begin());
}

PolicyKind policy_from_method(const std::string& method) {
    if (method == "ucb1") return PolicyKind::Ucb1;
    if (method == "kl_ucb") return PolicyKind::KlUcb;
    if (method == "thompson") return PolicyKind::Thompson;
    if (method == "bayes_ucb") return PolicyKind::BayesUcb;
    if (method == "softmax") return PolicyKind::Softmax;
    if (method == "wsls") return PolicyKind::Wsls;
    throw ConfigError("method \"" + method + "\" is not a bandit policy");
}

void RunConfig::validate() const {
    if (datasets.empty()) throw ConfigError("config needs at least one dataset");
    if (methods.empty()) throw ConfigError("config needs at least one method");
    if (seeds.empty()) throw ConfigError("config needs at least one seed");
    std::set<std::string> names;
    for (const DatasetConfig& d : datasets) {
        if (d.name.empty()) throw ConfigError("dataset with empty name");
        if (!names.insert(d.name).second) throw ConfigError("duplicate dataset name \"" + d.name + "\"");
        const bool file_backed = !d.path.empty();
        if (file_backed == d.synthetic.has_value()) {
            throw ConfigError("dataset \"" + d.name + "\" must set exactly one of path/synthetic");
        }
        if (file_backed && d.target_column.empty()) {
            throw ConfigError("dataset \"" + d.name + "\" needs a target column");
        }
    }
    std::set<std::string> seen;
    for (const std::string& m : methods) {
        if (std::find(known_methods().begin(), known_methods().end(), m) == known_methods().end()) {
            throw ConfigError("unknown method \"" + m + "\"");
        }
        if (!seen.insert(m).second) throw ConfigError("duplicate method \"" + m + "\"");
    }
    if (!(split.train_fraction > 0.0 && split.train_fraction < 1.0)) {
        throw ConfigError("split.train_fraction must be in (0, 1)");
    }
    if (ccp_folds < 2) throw ConfigError("ccp.folds must be >= 2");
    if (jobs < 0) throw ConfigError("jobs must be >= 0");
    try {
        prune.validate();
        for (const auto& [name, pc] : method_prune) pc.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

const PruneConfig& RunConfig::prune_for(const std::string& method) const {
    const auto it = method_prune.find(method);
    if (it == method_prune.end()) {
        throw ConfigError("no pruning configuration resolved for method \"" + method + "\"");
    }
    return it->second;
}

namespace {

[[noreturn]] void fail(const std::string& context, const std::string& what) {
    throw ConfigError(context + ": " + what);
}

const json* find(const json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double get_number(const json& obj, const char* key, double fallback, const std::string& context) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number()) fail(context, std::string("\"") + key + "\" must be a number");
    return v->get<double>();
}

long long get_integer(const json& obj, const char* key, long long fallback,
                      const std::string& context) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number_integer()) fail(context, std::string("\"") + key + "\" must be an integer");
    return v->get<long long>();
}

bool get_bool(const json& obj, const char* key, bool fallback, const std::string& context) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_boolean()) fail(context, std::string("\"") + key + "\" must be a boolean");
    return v->get<bool>();
}

std::string get_string(const json& obj, const char* key, const std::string& fallback,
                       const std::string& context) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_string()) fail(context, std::string("\"") + key + "\" must be a string");
    return v->get<std::string>();
}

void apply_prune_section(const json& section, PruneConfig& pc, const std::string& context) {
    if (!section.is_object()) fail(context, "pruning section must be an object");
    pc.rounds = get_integer(section, "rounds", pc.rounds, context);
    pc.min_prune_depth =
        static_cast<int>(get_integer(section, "min_prune_depth", pc.min_prune_depth, context));
    pc.eval_fraction = get_number(section, "eval_fraction", pc.eval_fraction, context);
    pc.eval_floor = static_cast<Eigen::Index>(
        get_integer(section, "eval_floor", static_cast<long long>(pc.eval_floor), context));
    pc.fixed_eval_subset = get_bool(section, "fixed_eval_subset", pc.fixed_eval_subset, context);
    pc.positive_class =
        static_cast<int>(get_integer(section, "positive_class", pc.positive_class, context));
    pc.policy.temperature = get_number(section, "temperature", pc.policy.temperature, context);
    pc.policy.kl_tolerance = get_number(section, "kl_tolerance", pc.policy.kl_tolerance, context);
    if (const json* weights = find(section, "weights")) {
        if (!weights->is_object()) fail(context, "\"weights\" must be an object");
        pc.weights.alpha = get_number(*weights, "alpha", pc.weights.alpha, context);
        pc.weights.beta = get_number(*weights, "beta", pc.weights.beta, context);
        pc.weights.gamma = get_number(*weights, "gamma", pc.weights.gamma, context);
    }
    if (const json* reward = find(section, "reward")) {
        if (!reward->is_object()) fail(context, "\"reward\" must be an object");
        pc.reward.threshold = get_number(*reward, "threshold", pc.reward.threshold, context);
        pc.reward.delta_max = get_number(*reward, "delta_max", pc.reward.delta_max, context);
    }
}

} // namespace

RunConfig parse_run_config(const std::string& json_text, const std::string& context) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        fail(context, e.what());
    }
    if (!root.is_object()) fail(context, "top level must be an object");

    RunConfig cfg;

    const json* datasets = find(root, "datasets");
    if (!datasets || !datasets->is_array()) fail(context, "\"datasets\" must be an array");
    for (const json& d : *datasets) {
        if (!d.is_object()) fail(context, "each dataset must be an object");
        DatasetConfig dc;
        dc.name = get_string(d, "name", "", context);
        dc.path = get_string(d, "path", "", context);
        dc.target_column = get_string(d, "target", "", context);
        if (const json* pl = find(d, "positive_label")) {
            if (!pl->is_string()) fail(context, "\"positive_label\" must be a string");
            dc.positive_label = pl->get<std::string>();
        }
        if (const json* synth = find(d, "synthetic")) {
            if (!synth->is_object()) fail(context, "\"synthetic\" must be an object");
            SyntheticSpec spec;
            spec.n_samples = static_cast<Eigen::Index>(get_integer(*synth, "n_samples", 0, context));
            spec.n_features =
                static_cast<Eigen::Index>(get_integer(*synth, "n_features", 0, context));
            spec.n_informative = static_cast<Eigen::Index>(
                get_integer(*synth, "n_informative", spec.n_features, context));
            spec.class_separation = get_number(*synth, "class_separation", 1.0, context);
            spec.label_noise = get_number(*synth, "label_noise", 0.0, context);
            spec.seed = static_cast<std::uint64_t>(get_integer(*synth, "seed", 0, context));
            dc.synthetic = spec;
        }
        cfg.datasets.push_back(std::move(dc));
    }

    const json* methods = find(root, "methods");
    if (!methods || !methods->is_array()) fail(context, "\"methods\" must be an array");
    for (const json& m : *methods) {
        if (!m.is_string()) fail(context, "each method must be a string");
        cfg.methods.push_back(m.get<std::string>());
    }

    const json* seeds = find(root, "seeds");
    if (!seeds || !seeds->is_array()) fail(context, "\"seeds\" must be an array");
    for (const json& s : *seeds) {
        if (!s.is_number_integer() || s.get<long long>() < 0) {
            fail(context, "each seed must be a nonnegative integer");
        }
        cfg.seeds.push_back(s.get<std::uint64_t>());
    }

    if (const json* split = find(root, "split")) {
        if (!split->is_object()) fail(context, "\"split\" must be an object");
        cfg.split.train_fraction =
            get_number(*split, "train_fraction", cfg.split.train_fraction, context);
    }
    if (const json* tree = find(root, "tree")) {
        if (!tree->is_object()) fail(context, "\"tree\" must be an object");
        cfg.tree.max_depth =
            static_cast<int>(get_integer(*tree, "max_depth", cfg.tree.max_depth, context));
        cfg.tree.min_samples_leaf = static_cast<int>(
            get_integer(*tree, "min_samples_leaf", cfg.tree.min_samples_leaf, context));
        cfg.tree.min_samples_split = static_cast<int>(
            get_integer(*tree, "min_samples_split", cfg.tree.min_samples_split, context));
    }

    const json* prune_section = find(root, "prune");
    if (prune_section) apply_prune_section(*prune_section, cfg.prune, context);

    // Resolve one PruneConfig per bandit method: defaults, then overrides.
    for (const std::string& method : known_methods()) {
        if (!is_mab_method(method)) continue;
        PruneConfig pc = cfg.prune;
        if (prune_section) {
            if (const json* overrides = find(*prune_section, "method_overrides")) {
                if (!overrides->is_object()) fail(context, "\"method_overrides\" must be an object");
                for (const auto& [key, value] : overrides->items()) {
                    if (!is_mab_method(key)) {
                        fail(context, "method_overrides key \"" + key + "\" is not a bandit method");
                    }
                }
                if (const json* mine = find(*overrides, method.c_str())) {
                    apply_prune_section(*mine, pc, context + " (override " + method + ")");
                }
            }
        }
        pc.policy.kind = policy_from_method(method);
        cfg.method_prune.emplace(method, pc);
    }

    if (const json* ccp = find(root, "ccp")) {
        if (!ccp->is_object()) fail(context, "\"ccp\" must be an object");
        cfg.ccp_folds = static_cast<int>(get_integer(*ccp, "folds", cfg.ccp_folds, context));
    }
    cfg.output_dir = get_string(root, "output_dir", cfg.output_dir, context);
    cfg.jobs = static_cast<int>(get_integer(root, "jobs", cfg.jobs, context));

    if (const char* env_out = std::getenv("MABPRUNE_OUTPUT_DIR")) cfg.output_dir = env_out;
    if (const char* env_jobs = std::getenv("MABPRUNE_JOBS")) {
        try {
            cfg.jobs = std::stoi(env_jobs);
        } catch (const std::exception&) {
            fail(context, "MABPRUNE_JOBS is not an integer");
        }
    }

    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_run_config(text.str(), path);
}

} // namespace mabprune
