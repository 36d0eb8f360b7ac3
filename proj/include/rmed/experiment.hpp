// experiment.hpp
//
// JSON experiment configs, dataset resolution, multi-run execution and the
// CSV files consumed by plotting scripts.
#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "rmed/policies.hpp"
#include "rmed/preference_matrix.hpp"
#include "rmed/rng.hpp"
#include "rmed/simulator.hpp"

namespace rmed {

/// Every problem found while reading a config, reported together.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems)
        : std::runtime_error(join(problems)), problems_(std::move(problems)) {}
    const std::vector<std::string>& problems() const { return problems_; }

private:
    static std::string join(const std::vector<std::string>& p) {
        std::string s;
        for (const auto& x : p) s += (s.empty() ? "" : "; ") + x;
        return s;
    }
    std::vector<std::string> problems_;
};

// ---------- datasets ----------

struct DatasetSpec {
    std::string name;                // builder name, or "csv"
    std::optional<double> q;         // example1
    std::optional<std::size_t> k;    // arithmetic
    std::optional<std::string> path; // csv

    bool operator==(const DatasetSpec&) const = default;

    /// Identifier used in CSV rows and file names.
    std::string label() const {
        if (name == "example1" && q) return "example1_q" + detail::format_decimal(*q);
        if (name == "arithmetic" && k && *k != 8) return "arithmetic" + std::to_string(*k);
        if (name == "csv" && path) return std::filesystem::path(*path).stem().string();
        return name;
    }
};

struct DatasetInfo {
    std::string name;
    std::string parameters;
    std::size_t k;  // 0 when it depends on a parameter
    std::string summary;
};

inline std::vector<DatasetInfo> dataset_inventory() {
    return {
        {"six_rankers", "", 6, "arXiv.org retrieval functions"},
        {"cyclic", "", 4, "arms 2-4 beat each other cyclically"},
        {"arithmetic", "--k (default 8, at most 11)", 8, "mu(i,j) = 0.5 + 0.05 (j - i)"},
        {"example1", "--q (required, in (0,1))", 3, "mu(2,3) = q"},
    };
}

inline bool is_builder(const std::string& name) {
    for (const auto& d : dataset_inventory()) {
        if (d.name == name) return true;
    }
    return false;
}

/// Builds or reads the matrix. Relative CSV paths resolve against `base_dir`.
inline PreferenceMatrix load_dataset(const DatasetSpec& d, const std::filesystem::path& base_dir = {}) {
    if (d.name == "six_rankers") return six_rankers();
    if (d.name == "cyclic") return cyclic();
    if (d.name == "arithmetic") return arithmetic(d.k.value_or(8));
    if (d.name == "example1") {
        if (!d.q) throw std::invalid_argument("example1 requires q");
        return example1(*d.q);
    }
    if (d.name == "csv") {
        std::filesystem::path p = d.path.value_or("");
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        std::ifstream in(p);
        if (!in) throw std::runtime_error("cannot open matrix file " + p.string());
        return from_csv(in);
    }
    throw std::invalid_argument("unknown dataset '" + d.name + "'");
}

// ---------- experiment config ----------

struct PolicyEntry {
    std::string label;
    PolicyConfig config;
    bool operator==(const PolicyEntry&) const = default;
};

struct ExperimentConfig {
    DatasetSpec dataset;
    std::vector<PolicyEntry> policies;
    std::uint64_t horizon{0};
    std::uint64_t runs{1};
    std::uint64_t base_seed{0};
    std::string output{"results"};
    std::vector<std::uint64_t> checkpoints;  // empty: default grid
    bool verbose{false};

    bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

inline const char* to_string(DeltaSign s) { return s == DeltaSign::literal ? "literal" : "population"; }

// Collects problems while reading typed fields out of a JSON object.
class FieldReader {
public:
    FieldReader(const nlohmann::json& obj, std::string where, std::vector<std::string>& problems)
        : obj_(obj), where_(std::move(where)), problems_(problems) {}

    template <typename T>
    std::optional<T> get(const std::string& key) {
        seen_.push_back(key);
        if (!obj_.contains(key)) return std::nullopt;
        try {
            return obj_.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            problems_.push_back(where_ + "." + key + " has the wrong type");
            return std::nullopt;
        }
    }

    void reject_unknown() {
        for (auto it = obj_.begin(); it != obj_.end(); ++it) {
            if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end()) {
                problems_.push_back(where_ + ": unknown key '" + it.key() + "'");
            }
        }
    }

private:
    const nlohmann::json& obj_;
    std::string where_;
    std::vector<std::string>& problems_;
    std::vector<std::string> seen_;
};

// Numbers in JSON may arrive as integers; read them as double.
template <>
inline std::optional<double> FieldReader::get<double>(const std::string& key) {
    seen_.push_back(key);
    if (!obj_.contains(key)) return std::nullopt;
    const auto& v = obj_.at(key);
    if (!v.is_number()) {
        problems_.push_back(where_ + "." + key + " must be a number");
        return std::nullopt;
    }
    return v.get<double>();
}

template <>
inline std::optional<std::uint64_t> FieldReader::get<std::uint64_t>(const std::string& key) {
    seen_.push_back(key);
    if (!obj_.contains(key)) return std::nullopt;
    const auto& v = obj_.at(key);
    if (!v.is_number_unsigned()) {
        problems_.push_back(where_ + "." + key + " must be a non-negative integer");
        return std::nullopt;
    }
    return v.get<std::uint64_t>();
}

inline std::optional<DatasetSpec> parse_dataset(const nlohmann::json& j, std::vector<std::string>& problems) {
    if (!j.is_object()) {
        problems.push_back("dataset must be an object");
        return std::nullopt;
    }
    FieldReader r(j, "dataset", problems);
    DatasetSpec d;
    const auto before = problems.size();
    auto name = r.get<std::string>("name");
    auto path = r.get<std::string>("path");
    auto q = r.get<double>("q");
    auto k = r.get<std::uint64_t>("k");
    r.reject_unknown();
    if (!name) name = path ? "csv" : "";
    d.name = *name;
    if (d.name.empty()) {
        problems.push_back("dataset.name is required (six_rankers, cyclic, arithmetic, example1, csv)");
    } else if (d.name != "csv" && !is_builder(d.name)) {
        problems.push_back("dataset.name '" + d.name + "' is not a known dataset");
    }
    if (d.name == "example1") {
        if (!q) problems.push_back("dataset example1 requires q");
        else if (!(*q > 0.0 && *q < 1.0)) problems.push_back("dataset.q must lie in (0,1)");
        d.q = q;
    } else if (q) {
        problems.push_back("dataset.q only applies to example1");
    }
    if (d.name == "arithmetic") {
        if (k && (*k < 2 || *k > 11)) problems.push_back("dataset.k must lie in [2,11]");
        d.k = k ? std::optional<std::size_t>(*k) : std::nullopt;
    } else if (k) {
        problems.push_back("dataset.k only applies to arithmetic");
    }
    if (d.name == "csv") {
        if (!path) problems.push_back("dataset csv requires path");
        d.path = path;
    } else if (path) {
        problems.push_back("dataset.path only applies to csv");
    }
    if (problems.size() != before) return std::nullopt;
    return d;
}

inline std::string param_suffix(const std::string& key, double v) {
    return "_" + key + format_decimal(v);
}

// One JSON policy entry may expand into several via "sweep".
inline std::vector<PolicyEntry> parse_policy(const nlohmann::json& j, std::size_t index,
                                             std::uint64_t horizon, std::vector<std::string>& problems) {
    const std::string where = "policies[" + std::to_string(index) + "]";
    if (!j.is_object()) {
        problems.push_back(where + " must be an object");
        return {};
    }
    FieldReader r(j, where, problems);
    const auto before = problems.size();
    auto name = r.get<std::string>("name");
    auto label = r.get<std::string>("label");
    auto c = r.get<double>("c");
    auto eps = r.get<double>("eps");
    auto alpha = r.get<double>("alpha");
    auto fh_horizon = r.get<std::uint64_t>("horizon");
    auto sign = r.get<std::string>("delta_sign");
    auto sweep = r.get<nlohmann::json>("sweep");
    r.reject_unknown();

    if (!name) {
        problems.push_back(where + ".name is required (rmed1, rmed2, rmed2fh, rucb)");
        return {};
    }
    PolicyConfig base;
    if (*name == "rucb") {
        RucbConfig rc;
        if (alpha) rc.alpha = *alpha;
        for (const char* key : {"c", "eps", "horizon", "delta_sign"}) {
            if (j.contains(key)) problems.push_back(where + "." + key + " does not apply to rucb");
        }
        base = rc;
    } else if (*name == "rmed1" || *name == "rmed2" || *name == "rmed2fh") {
        RmedConfig rc;
        rc.variant = *name == "rmed1" ? Variant::rmed1 : *name == "rmed2" ? Variant::rmed2 : Variant::rmed2fh;
        if (c) rc.c = *c;
        if (eps) rc.eps = *eps;
        if (rc.variant != Variant::rmed1) rc.alpha = alpha.value_or(3.0);
        else if (alpha) problems.push_back(where + ".alpha does not apply to rmed1");
        if (rc.variant == Variant::rmed2fh) rc.horizon = fh_horizon.value_or(horizon);
        else if (fh_horizon) problems.push_back(where + ".horizon only applies to rmed2fh");
        if (sign) {
            if (*sign == "population") rc.delta_sign = DeltaSign::population;
            else if (*sign == "literal") rc.delta_sign = DeltaSign::literal;
            else problems.push_back(where + ".delta_sign must be 'population' or 'literal'");
        }
        base = rc;
    } else {
        problems.push_back(where + ".name '" + *name + "' is not a known policy");
        return {};
    }

    std::vector<PolicyEntry> out;
    if (!sweep) {
        out.push_back({label.value_or(*name), base});
    } else if (!sweep->is_object() || sweep->size() != 1) {
        problems.push_back(where + ".sweep must be an object with exactly one parameter");
    } else {
        const std::string key = sweep->begin().key();
        const auto& values = sweep->begin().value();
        const bool rmed = std::holds_alternative<RmedConfig>(base);
        const bool known = key == "alpha" || (rmed && (key == "c" || key == "eps"));
        if (!known) {
            problems.push_back(where + ".sweep parameter '" + key + "' cannot be swept for " + *name);
        } else if (!values.is_array() || values.empty()) {
            problems.push_back(where + ".sweep." + key + " must be a non-empty array of numbers");
        } else {
            for (const auto& v : values) {
                if (!v.is_number()) {
                    problems.push_back(where + ".sweep." + key + " must contain only numbers");
                    break;
                }
                const double x = v.get<double>();
                PolicyConfig cfg = base;
                if (auto* rc = std::get_if<RmedConfig>(&cfg)) {
                    if (key == "c") rc->c = x;
                    else if (key == "eps") rc->eps = x;
                    else if (rc->variant == Variant::rmed1) {
                        problems.push_back(where + ".sweep.alpha does not apply to rmed1");
                        break;
                    } else rc->alpha = x;
                } else {
                    std::get<RucbConfig>(cfg).alpha = x;
                }
                out.push_back({label.value_or(*name) + param_suffix(key, x), cfg});
            }
        }
    }
    for (const auto& e : out) {
        for (const auto& p : rmed::problems(e.config)) problems.push_back(where + " (" + e.label + "): " + p);
    }
    if (problems.size() != before) return {};
    return out;
}

}  // namespace detail

/// Reads and checks a config; throws ConfigError listing every problem.
inline ExperimentConfig parse_config(const nlohmann::json& j) {
    std::vector<std::string> problems;
    if (!j.is_object()) throw ConfigError({"config must be a JSON object"});
    detail::FieldReader r(j, "config", problems);
    ExperimentConfig cfg;

    auto horizon = r.get<std::uint64_t>("horizon");
    if (!horizon) problems.push_back("horizon is required");
    else if (*horizon < 1) problems.push_back("horizon must be >= 1");
    else cfg.horizon = *horizon;

    if (auto runs = r.get<std::uint64_t>("runs")) {
        if (*runs < 1) problems.push_back("runs must be >= 1");
        else cfg.runs = *runs;
    }
    if (auto seed = r.get<std::uint64_t>("base_seed")) cfg.base_seed = *seed;
    if (auto out = r.get<std::string>("output")) cfg.output = *out;
    if (auto v = r.get<bool>("verbose")) cfg.verbose = *v;
    if (auto cps = r.get<std::vector<std::uint64_t>>("checkpoints")) {
        cfg.checkpoints = *cps;
        for (std::size_t c = 0; c < cps->size(); ++c) {
            const auto t = (*cps)[c];
            if (t < 1 || (cfg.horizon && t > cfg.horizon) || (c > 0 && t <= (*cps)[c - 1])) {
                problems.push_back("checkpoints must be strictly increasing within [1, horizon]");
                break;
            }
        }
    }

    if (auto ds = r.get<nlohmann::json>("dataset")) {
        if (auto d = detail::parse_dataset(*ds, problems)) cfg.dataset = *d;
    } else {
        problems.push_back("dataset is required");
    }

    if (auto pol = r.get<nlohmann::json>("policies")) {
        if (!pol->is_array() || pol->empty()) {
            problems.push_back("policies must be a non-empty array");
        } else {
            for (std::size_t i = 0; i < pol->size(); ++i) {
                for (auto& e : detail::parse_policy((*pol)[i], i, cfg.horizon, problems)) {
                    cfg.policies.push_back(std::move(e));
                }
            }
        }
    } else {
        problems.push_back("policies is required");
    }
    r.reject_unknown();

    std::vector<std::string> labels;
    for (const auto& p : cfg.policies) {
        if (p.label.empty() || p.label.find_first_of(",\n\r/\\\"") != std::string::npos) {
            problems.push_back("policy label '" + p.label + "' must be non-empty without , / \\ \" or newlines");
        }
        if (std::find(labels.begin(), labels.end(), p.label) != labels.end()) {
            problems.push_back("duplicate policy label '" + p.label + "'");
        }
        labels.push_back(p.label);
    }
    if (!problems.empty()) throw ConfigError(std::move(problems));
    return cfg;
}

inline ExperimentConfig parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError({std::string("config is not valid JSON: ") + e.what()});
    }
    return parse_config(j);
}

namespace detail {

inline nlohmann::ordered_json to_ordered_json(const ExperimentConfig& cfg) {
    nlohmann::ordered_json ds;
    ds["name"] = cfg.dataset.name;
    if (cfg.dataset.q) ds["q"] = *cfg.dataset.q;
    if (cfg.dataset.k) ds["k"] = static_cast<std::uint64_t>(*cfg.dataset.k);
    if (cfg.dataset.path) ds["path"] = *cfg.dataset.path;

    nlohmann::ordered_json pols = nlohmann::ordered_json::array();
    for (const auto& p : cfg.policies) {
        nlohmann::ordered_json e;
        if (const auto* rc = std::get_if<RmedConfig>(&p.config)) {
            e["name"] = rmed::to_string(rc->variant);
            e["label"] = p.label;
            e["c"] = rc->c;
            e["eps"] = rc->eps;
            if (rc->alpha) e["alpha"] = *rc->alpha;
            if (rc->horizon) e["horizon"] = *rc->horizon;
            e["delta_sign"] = to_string(rc->delta_sign);
        } else {
            e["name"] = "rucb";
            e["label"] = p.label;
            e["alpha"] = std::get<RucbConfig>(p.config).alpha;
        }
        pols.push_back(e);
    }

    nlohmann::ordered_json j;
    j["dataset"] = ds;
    j["policies"] = pols;
    j["horizon"] = cfg.horizon;
    j["runs"] = cfg.runs;
    j["base_seed"] = cfg.base_seed;
    j["output"] = cfg.output;
    if (!cfg.checkpoints.empty()) j["checkpoints"] = cfg.checkpoints;
    j["verbose"] = cfg.verbose;
    return j;
}

}  // namespace detail

/// Canonical, fully expanded form; parse_config(to_json(c)) == c.
inline nlohmann::json to_json(const ExperimentConfig& cfg) {
    return nlohmann::json::parse(detail::to_ordered_json(cfg).dump());
}

inline std::string print_config(const ExperimentConfig& cfg) { return detail::to_ordered_json(cfg).dump(2) + "\n"; }

// ---------- execution ----------

struct PolicyResult {
    std::string label;
    std::vector<std::uint64_t> seeds;  // per run, in run order
    std::vector<RegretTrace> traces;
    RegretSummary summary;
};

struct ExperimentResult {
    std::string dataset;
    std::vector<PolicyResult> policies;
};

/// Runs every policy `runs` times. Run r of every policy uses the same
/// seed derive_seed(base_seed, r).
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const PreferenceMatrix& m,
                                       unsigned threads) {
    ExperimentResult result;
    result.dataset = cfg.dataset.label();
    for (const auto& p : cfg.policies) {
        PolicyResult pr;
        pr.label = p.label;
        std::vector<RunSpec> specs;
        for (std::uint64_t r = 0; r < cfg.runs; ++r) {
            pr.seeds.push_back(derive_seed(cfg.base_seed, r));
            specs.push_back({m, p.config, cfg.horizon, pr.seeds.back(), cfg.checkpoints});
        }
        if (auto problems = rmed::problems(specs.front()); !problems.empty()) {
            for (auto& s : problems) s = p.label + ": " + s;
            throw ConfigError(std::move(problems));
        }
        pr.traces = run_all(specs, threads);
        pr.summary = aggregate(pr.traces);
        result.policies.push_back(std::move(pr));
    }
    return result;
}

// ---------- CSV output ----------

inline constexpr const char* kSummaryHeader = "policy,dataset,t,mean_regret,sd_regret,runs\n";
inline constexpr const char* kRawHeader = "policy,dataset,seed,t,cum_regret\n";

inline std::string summary_rows(const std::string& policy, const std::string& dataset,
                                const RegretSummary& s) {
    std::string out;
    for (std::size_t c = 0; c < s.t.size(); ++c) {
        out += policy + ',' + dataset + ',' + std::to_string(s.t[c]) + ',' + detail::format_decimal(s.mean[c]) +
               ',' + detail::format_decimal(s.sd[c]) + ',' + std::to_string(s.runs) + '\n';
    }
    return out;
}

inline std::string summary_csv(const std::string& policy, const std::string& dataset, const RegretSummary& s) {
    return kSummaryHeader + summary_rows(policy, dataset, s);
}

/// Per-run rows sorted by (seed, t).
inline std::string raw_csv(const std::string& dataset, const PolicyResult& pr) {
    std::vector<std::size_t> order(pr.traces.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return pr.seeds[a] < pr.seeds[b]; });
    std::string out = kRawHeader;
    for (auto r : order) {
        for (const auto& cp : pr.traces[r].checkpoints) {
            out += pr.label + ',' + dataset + ',' + std::to_string(pr.seeds[r]) + ',' + std::to_string(cp.t) + ',' +
                   detail::format_decimal(cp.regret) + '\n';
        }
    }
    return out;
}

/// File name -> contents for every output of an experiment.
inline std::map<std::string, std::string> render_outputs(const ExperimentResult& result, bool verbose) {
    std::map<std::string, std::string> files;
    std::string combined = kSummaryHeader;
    for (const auto& pr : result.policies) {
        const std::string stem = result.dataset + "__" + pr.label;
        files[stem + ".csv"] = summary_csv(pr.label, result.dataset, pr.summary);
        combined += summary_rows(pr.label, result.dataset, pr.summary);
        if (verbose) files[stem + "__runs.csv"] = raw_csv(result.dataset, pr);
    }
    files["summary.csv"] = std::move(combined);
    return files;
}

/// Writes rendered outputs into `dir` (created if missing); returns the paths written.
inline std::vector<std::filesystem::path> write_outputs(const std::map<std::string, std::string>& files,
                                                        const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    for (const auto& [name, text] : files) {
        const auto path = dir / name;
        std::ofstream out(path, std::ios::binary);
        if (!(out << text)) throw std::runtime_error("cannot write " + path.string());
        written.push_back(path);
    }
    return written;
}

}  // namespace rmed
