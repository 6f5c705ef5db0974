// svmcodoa: run, compare and plot SVM kernel-width optimization experiments.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 run failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "svmcodoa/svmcodoa.hpp"

namespace fs = std::filesystem;
using namespace svmcodoa;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitRun = 3;

/// Options shared by `run` and `compare`. Unset optionals keep library defaults.
struct CommonOptions {
    std::string dataset;
    std::optional<std::size_t> particles;
    std::optional<std::size_t> iterations;
    std::optional<std::size_t> runs;
    std::optional<std::uint64_t> seed;
    std::optional<double> sigma_min;
    std::optional<double> sigma_max;
    std::optional<double> c;
    std::optional<double> max_seconds;
    std::optional<std::uint64_t> split_seed;
    std::size_t threads = 1;
    std::vector<std::string> params;
    std::string out;
    bool paper_scale = false;
    bool skip_failed = false;
    bool reshuffle = false;
    std::string config;  // consumed before parsing; declared for --help
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--dataset", o.dataset, "Dataset manifest file")->required();
    cmd->add_option("--particles", o.particles, "Population size (default 20)");
    cmd->add_option("--iterations", o.iterations, "Iterations per run (default 200)");
    cmd->add_option("--runs", o.runs, "Independent runs (default 5)");
    cmd->add_option("--seed", o.seed, "Master seed (default 1)");
    cmd->add_option("--sigma-min", o.sigma_min, "Lower bound of sigma (default 0.01)");
    cmd->add_option("--sigma-max", o.sigma_max, "Upper bound of sigma (default 50)");
    cmd->add_option("--c", o.c, "SVM box constraint C (default 1)");
    cmd->add_option("--max-seconds", o.max_seconds, "Wall-time budget; unfinished runs are marked incomplete");
    cmd->add_option("--split-seed", o.split_seed, "Override the manifest's split seed");
    cmd->add_option("--threads", o.threads, "Parallel run workers (default 1)")->check(CLI::PositiveNumber);
    cmd->add_option("--param", o.params, "Optimizer parameter override key=value (repeatable)");
    cmd->add_option("--out", o.out, "Output directory for reports");
    cmd->add_flag("--paper-scale", o.paper_scale, "90 particles, 5000 iterations, 50 runs");
    cmd->add_flag("--skip-failed", o.skip_failed, "Record failed runs and exclude them from the means");
    cmd->add_flag("--reshuffle-per-run", o.reshuffle, "Draw a new train/test split for every run");
    cmd->add_option("--config", o.config, "key=value file with the same keys as the flags");
}

ParamOverrides parse_params(const std::vector<std::string>& items) {
    ParamOverrides out;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ConfigError("--param expects key=value, got '" + item + "'");
        const auto value = text::parse_double(text::trim(item.substr(eq + 1)));
        if (!value) throw ConfigError("--param " + item + ": value is not a number");
        out[std::string(text::trim(item.substr(0, eq)))] = *value;
    }
    return out;
}

ExperimentConfig make_config(const CommonOptions& o, const std::string& optimizer) {
    ExperimentConfig cfg;
    cfg.manifest = o.dataset;
    cfg.optimizer = optimizer;
    cfg.params = parse_params(o.params);
    if (o.paper_scale) cfg.apply_paper_scale();
    if (o.particles) cfg.run.population_size = *o.particles;
    if (o.iterations) cfg.run.max_iterations = *o.iterations;
    if (o.runs) cfg.runs = *o.runs;
    if (o.seed) cfg.run.seed = *o.seed;
    if (o.sigma_min) cfg.sigma_min = *o.sigma_min;
    if (o.sigma_max) cfg.sigma_max = *o.sigma_max;
    if (o.c) cfg.c = *o.c;
    if (o.max_seconds) cfg.max_seconds = *o.max_seconds;
    cfg.split_seed = o.split_seed;
    cfg.threads = o.threads;
    cfg.skip_failed = o.skip_failed;
    cfg.reshuffle_per_run = o.reshuffle;
    if (!fs::exists(cfg.manifest)) throw ConfigError("manifest not found: " + cfg.manifest.string());
    return cfg;
}

/// Expands `--config FILE` into `--key=value` tokens placed after the
/// subcommand name, skipping keys already given on the command line.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    std::optional<std::string> file;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) file = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) file = args[i].substr(9);
    }
    if (!file || args.size() < 2) return args;
    std::ifstream in(*file);
    if (!in) throw ConfigError("cannot read config file " + *file);
    auto given = [&](const std::string& key) {
        for (const auto& a : args)
            if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0) return true;
        return false;
    };
    std::vector<std::string> extra;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = std::string(text::trim(line));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(*file + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key(text::trim(line.substr(0, eq)));
        const std::string value(text::trim(line.substr(eq + 1)));
        if (key == "config") continue;
        if (key != "param" && given(key)) continue;
        extra.push_back("--" + key + "=" + value);
    }
    args.insert(args.begin() + 2, extra.begin(), extra.end());
    return args;
}

void print_report(const AggregateReport& rep) { std::cout << summary_text(rep); }

int cmd_run(const CommonOptions& o, const std::string& optimizer, const std::string& save_path, const std::string& load) {
    ExperimentConfig cfg = make_config(o, optimizer);
    const DatasetManifest manifest = DatasetManifest::load(cfg.manifest);

    if (!load.empty()) {
        const SavedModel saved = load_model(load);
        const PreparedData data = load_prepared(manifest, cfg.split_seed.value_or(manifest.split_seed));
        if (saved.class_names != data.test.class_names)
            throw DataError("model classes do not match dataset " + manifest.name);
        const auto counts = count_diagnoses(saved.model.predict_all(data.test.features), data.test.labels);
        std::cout << "dataset: " << manifest.name << "   model: " << load << "\n"
                  << "TD " << counts.true_diagnosis << "   FD " << counts.false_diagnosis << "   accuracy "
                  << format_accuracy(counts) << "\n";
        return kExitOk;
    }

    const AggregateReport rep = run_experiment(cfg);
    print_report(rep);
    if (!o.out.empty()) {
        write_report(rep, o.out);
        std::cout << "reports written to " << o.out << "\n";
    }
    if (!save_path.empty()) {
        if (!rep.best_model) throw RunError("no completed run to save a model from");
        save_model(save_path, *rep.best_model);
        std::cout << "model written to " << save_path << "\n";
    }
    for (const auto& r : rep.records)
        if (r.status == "incomplete") return kExitRun;
    return kExitOk;
}

int cmd_compare(const CommonOptions& o, const std::vector<std::string>& optimizers) {
    if (optimizers.size() < 2) throw ConfigError("compare: give at least two optimizers");
    std::vector<AggregateReport> reports;
    for (const auto& name : optimizers) {
        const ExperimentConfig cfg = make_config(o, name);
        std::cerr << "running " << name << "...\n";
        reports.push_back(run_experiment(cfg));
        if (!o.out.empty()) write_report(reports.back(), fs::path(o.out) / name);
    }
    const ComparisonTable table = compare(reports);
    std::cout << comparison_text(table);
    if (!o.out.empty()) {
        write_text(fs::path(o.out) / "comparison.txt", comparison_text(table));
        write_text(fs::path(o.out) / "comparison.csv", comparison_csv(table));
        write_text(fs::path(o.out) / "plot.csv", emit_plot_data(reports));
        std::cout << "reports written to " << o.out << "\n";
    }
    return kExitOk;
}

int cmd_compare_reports(const std::vector<std::string>& files, const std::string& out) {
    std::vector<AggregateReport> reports;
    for (const auto& f : files) reports.push_back(read_report(f));
    const ComparisonTable table = compare(reports);
    std::cout << comparison_text(table);
    if (!out.empty()) {
        fs::create_directories(out);
        write_text(fs::path(out) / "comparison.txt", comparison_text(table));
        write_text(fs::path(out) / "comparison.csv", comparison_csv(table));
    }
    return kExitOk;
}

int cmd_plot(const std::vector<std::string>& files, const std::string& out) {
    std::vector<AggregateReport> reports;
    for (const auto& f : files) reports.push_back(read_report(f));
    const std::string csv = emit_plot_data(reports);
    if (out.empty()) std::cout << csv;
    else write_text(out, csv);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SVM kernel-width optimization with CoDOA and baseline metaheuristics"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    CommonOptions run_opts, cmp_opts;
    std::string optimizer = "codoa", save_path, load_path;
    auto* run = app.add_subcommand("run", "Run one optimizer on one dataset");
    add_common(run, run_opts);
    run->add_option("--optimizer", optimizer, "codoa | ga | de | csa | pso")
        ->check(CLI::IsMember({"codoa", "ga", "de", "csa", "pso"}));
    run->add_option("--save-model", save_path, "Write the final model of the best run");
    run->add_option("--load-model", load_path, "Evaluate a saved model on the test split instead of optimizing");

    std::vector<std::string> optimizers{"codoa", "ga", "de", "csa", "pso"};
    std::vector<std::string> cmp_reports;
    auto* cmp = app.add_subcommand("compare", "Run several optimizers on one dataset, or compare saved reports");
    add_common(cmp, cmp_opts);
    cmp->get_option("--dataset")->required(false);
    cmp->add_option("--optimizers", optimizers, "Comma-separated optimizer names")->delimiter(',');
    cmp->add_option("--reports", cmp_reports, "Compare existing report.json files instead of running");

    std::vector<std::string> plot_reports;
    std::string plot_out;
    auto* plot = app.add_subcommand("plot-data", "Emit dataset,optimizer,mean_accuracy rows from reports");
    plot->add_option("--reports", plot_reports, "report.json files")->required();
    plot->add_option("--out", plot_out, "Output file (default stdout)");

    try {
        std::vector<std::string> args(argv, argv + argc);
        args = expand_config(std::move(args));
        std::vector<const char*> cargs;
        for (const auto& a : args) cargs.push_back(a.c_str());
        try {
            app.parse(static_cast<int>(cargs.size()), cargs.data());
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e);
            return code == 0 ? kExitOk : kExitUsage;
        }
        if (*run) return cmd_run(run_opts, optimizer, save_path, load_path);
        if (*cmp) {
            if (!cmp_reports.empty()) return cmd_compare_reports(cmp_reports, cmp_opts.out);
            if (cmp_opts.dataset.empty()) throw ConfigError("compare: give --dataset or --reports");
            return cmd_compare(cmp_opts, optimizers);
        }
        if (*plot) return cmd_plot(plot_reports, plot_out);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const RunError& e) {
        std::cerr << "run failed: " << e.what() << "\n";
        return kExitRun;
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << "\n";
        return kExitRun;
    }
    return kExitUsage;
}
