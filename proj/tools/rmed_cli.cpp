// rmed: command-line front end for the dueling-bandit toolkit.
//
// Exit codes: 0 success, 1 usage/config error, 2 data/validation error,
// 3 runtime failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "rmed/experiment.hpp"
#include "rmed/rmed.hpp"

namespace {

enum Exit : int { ok = 0, usage = 1, data = 2, runtime = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

unsigned default_threads() {
    if (const char* env = std::getenv("RMED_THREADS")) {
        try {
            const long n = std::stol(env);
            if (n > 0) return static_cast<unsigned>(n);
        } catch (const std::exception&) {
        }
        std::cerr << "warning: ignoring RMED_THREADS='" << env << "'\n";
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::string winner_text(const rmed::PreferenceMatrix& m) {
    auto w = rmed::condorcet_winner(m);
    return w ? "Condorcet winner: " + std::to_string(*w + 1) : "no Condorcet winner";
}

rmed::PreferenceMatrix read_matrix_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError(path + ": cannot open file");
    try {
        return rmed::from_csv(in);
    } catch (const rmed::CsvError& e) {
        throw rmed::CsvError(e.kind(), e.line(), path + ": " + e.what(), e.violations());
    }
}

int cmd_list() {
    for (const auto& d : rmed::dataset_inventory()) {
        std::cout << d.name << " K=" << d.k;
        if (!d.parameters.empty()) std::cout << " params: " << d.parameters;
        if (d.name != "example1") {
            std::cout << " " << winner_text(rmed::load_dataset({d.name, {}, {}, {}}));
        } else {
            std::cout << " Condorcet winner: 1 (any q)";
        }
        std::cout << "  (" << d.summary << ")\n";
    }
    return ok;
}

int cmd_validate(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << path << ": cannot open file\n";
        return data;
    }
    try {
        const auto m = rmed::from_csv(in);
        std::cout << "valid, K=" << m.size() << ", " << winner_text(m) << "\n";
        return ok;
    } catch (const rmed::CsvError& e) {
        std::cout << "invalid\n";
        std::cerr << path << ": " << e.what() << "\n";
        return data;
    }
}

int cmd_analyze(const std::string& source, const std::optional<double>& q, const std::optional<std::size_t>& k) {
    rmed::PreferenceMatrix m;
    std::string name = source;
    if (rmed::is_builder(source)) {
        if (source == "example1" && !q) throw UsageError("example1 requires --q");
        if (q && source != "example1") throw UsageError("--q only applies to example1");
        if (k && source != "arithmetic") throw UsageError("--k only applies to arithmetic");
        rmed::DatasetSpec spec{source, q, k, {}};
        name = spec.label();
        try {
            m = rmed::load_dataset(spec);
        } catch (const std::domain_error& e) {
            throw UsageError(e.what());
        }
    } else {
        if (q || k) throw UsageError("--q/--k only apply to built-in datasets");
        m = read_matrix_file(source);
    }

    if (!rmed::condorcet_winner(m)) {
        std::cerr << name << ": no Condorcet winner; bounds are undefined\n";
        return data;
    }
    const auto report = rmed::true_lb_coefficient(m);
    std::cout << "dataset: " << name << " (K=" << m.size() << ")\n";
    std::cout << "Condorcet winner: " << report.winner + 1 << "\n";
    std::cout << "arm,best_opponent,term\n";
    std::string row;
    for (rmed::Arm i = 0; i < m.size(); ++i) {
        if (i == report.winner) continue;
        std::cout << i + 1 << "," << report.best_opponent[i] + 1 << ","
                  << rmed::detail::format_decimal(report.term[i]) << "\n";
        row += (row.empty() ? "" : ", ") + std::to_string(i + 1) + "->" + std::to_string(report.best_opponent[i] + 1);
    }
    std::cout << "b*: " << row << "\n";
    std::cout << "TrueLB total: " << rmed::detail::format_decimal(report.true_lb) << "\n";
    std::cout << "LB1 total: " << rmed::detail::format_decimal(report.lb1) << "\n";
    return ok;
}

int cmd_run(const std::string& config_path, unsigned threads, bool verbose, bool print_only,
            const std::string& output_override) {
    std::ifstream in(config_path);
    if (!in) {
        std::cerr << config_path << ": cannot open config\n";
        return usage;
    }
    std::stringstream text;
    text << in.rdbuf();

    rmed::ExperimentConfig cfg;
    try {
        cfg = rmed::parse_config(text.str());
    } catch (const rmed::ConfigError& e) {
        std::cerr << config_path << ": invalid config\n";
        for (const auto& p : e.problems()) std::cerr << "  - " << p << "\n";
        return usage;
    }
    if (verbose) cfg.verbose = true;
    if (!output_override.empty()) cfg.output = output_override;
    if (print_only) {
        std::cout << rmed::print_config(cfg);
        return ok;
    }

    rmed::PreferenceMatrix m;
    try {
        m = rmed::load_dataset(cfg.dataset, std::filesystem::path(config_path).parent_path());
    } catch (const std::exception& e) {
        std::cerr << "dataset: " << e.what() << "\n";
        return data;
    }

    rmed::ExperimentResult result;
    try {
        result = rmed::run_experiment(cfg, m, threads);
    } catch (const rmed::ConfigError& e) {
        std::cerr << "cannot run:\n";
        for (const auto& p : e.problems()) std::cerr << "  - " << p << "\n";
        return data;
    }
    for (const auto& path : rmed::write_outputs(rmed::render_outputs(result, cfg.verbose), cfg.output)) {
        std::cout << "wrote " << path.string() << "\n";
    }
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dueling-bandit simulation and analysis (RMED, RUCB)"};
    app.require_subcommand(1);

    auto* list = app.add_subcommand("list", "List built-in datasets");

    auto* validate = app.add_subcommand("validate", "Check a preference-matrix CSV");
    std::string validate_path;
    validate->add_option("path", validate_path, "Matrix CSV (K lines of K decimals)")->required();

    auto* analyze = app.add_subcommand("analyze", "Print best opponents and regret-bound coefficients");
    std::string analyze_source;
    std::optional<double> q;
    std::optional<std::size_t> k;
    analyze->add_option("dataset", analyze_source, "Built-in dataset name or matrix CSV path")->required();
    analyze->add_option("--q", q, "example1 parameter");
    analyze->add_option("--k", k, "arithmetic arm count");

    auto* run = app.add_subcommand("run", "Run an experiment config and write CSVs");
    std::string config_path;
    std::string output;
    unsigned threads = 0;
    bool verbose = false;
    bool print_config = false;
    run->add_option("config", config_path, "Experiment JSON")->required();
    run->add_option("--threads", threads, "Worker threads (default: $RMED_THREADS or all cores)")
        ->check(CLI::PositiveNumber);
    run->add_option("--output", output, "Output directory (overrides the config)");
    run->add_flag("--verbose", verbose, "Also write per-run CSVs");
    run->add_flag("--print-config", print_config, "Print the expanded config and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return usage;
    }

    try {
        if (*list) return cmd_list();
        if (*validate) return cmd_validate(validate_path);
        if (*analyze) return cmd_analyze(analyze_source, q, k);
        if (*run) return cmd_run(config_path, threads ? threads : default_threads(), verbose, print_config, output);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    } catch (const rmed::CsvError& e) {
        std::cerr << e.what() << "\n";
        return data;
    } catch (const DataError& e) {
        std::cerr << e.what() << "\n";
        return data;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return runtime;
    }
    return usage;
}
