#pragma once

// Optimizer x dataset experiments: repeated runs with derived seeds,
// final test-split evaluation, aggregation and report files.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "svmcodoa/core.hpp"
#include "svmcodoa/dataset.hpp"
#include "svmcodoa/model_io.hpp"
#include "svmcodoa/objective.hpp"
#include "svmcodoa/optimizers.hpp"
#include "svmcodoa/rng.hpp"

namespace svmcodoa {

inline constexpr const char* kVersion = "svmcodoa 1.0.0";

/// A run failed and --skip-failed was not given (CLI exit code 3).
class RunError : public Error {
public:
    using Error::Error;
};

/// Named numeric parameter overrides, e.g. {"ir": 0.5, "ml": 3}.
using ParamOverrides = std::map<std::string, double>;

namespace experiment_detail {

inline void apply(const ParamOverrides& o, std::string_view opt, std::initializer_list<std::pair<const char*, double*>> fields) {
    for (const auto& [key, value] : o) {
        bool known = false;
        for (const auto& [name, target] : fields) {
            if (key == name) {
                *target = value;
                known = true;
            }
        }
        if (!known) throw ConfigError("unknown parameter '" + key + "' for optimizer " + std::string(opt));
    }
}

}  // namespace experiment_detail

/// Optimizer by name with parameter overrides:
///   codoa: ir, ir_max, ir_min, ml, r
///   ga:    crossover, mutation, tournament, mutation_sigma
///   de:    f, cr
///   csa:   select_n, clone_factor, mutation_scale, replacements
///   pso:   w, c1, c2, v_max
inline AnyOptimizer make_optimizer(std::string_view name, const ParamOverrides& o = {}) {
    using experiment_detail::apply;
    if (name == "codoa") {
        CodoaParams p;
        double ml = p.maturity_limit, r = p.rationality_rate;
        apply(o, name, {{"ir", &p.initial_ir}, {"ir_max", &p.ir_max}, {"ir_min", &p.ir_min}, {"ml", &ml}, {"r", &r}});
        p.maturity_limit = static_cast<int>(ml);
        p.rationality_rate = static_cast<int>(r);
        p.validate();
        return Codoa(p);
    }
    if (name == "ga") {
        GaParams p;
        double t = static_cast<double>(p.tournament_size);
        apply(o, name, {{"crossover", &p.crossover_rate}, {"mutation", &p.mutation_rate}, {"tournament", &t},
                        {"mutation_sigma", &p.mutation_sigma}});
        p.tournament_size = static_cast<std::size_t>(t);
        p.validate();
        return Ga(p);
    }
    if (name == "de") {
        DeParams p;
        apply(o, name, {{"f", &p.differential_weight}, {"cr", &p.crossover_prob}});
        p.validate();
        return De(p);
    }
    if (name == "csa") {
        CsaParams p;
        double sel = 0, rep = 0;
        apply(o, name, {{"select_n", &sel}, {"clone_factor", &p.clone_factor}, {"mutation_scale", &p.mutation_scale},
                        {"replacements", &rep}});
        p.select_n = static_cast<std::size_t>(sel);
        p.random_replacements = static_cast<std::size_t>(rep);
        p.validate();
        return Csa(p);
    }
    if (name == "pso") {
        PsoParams p;
        apply(o, name, {{"w", &p.inertia}, {"c1", &p.cognitive}, {"c2", &p.social}, {"v_max", &p.v_max}});
        p.validate();
        return Pso(p);
    }
    return AnyOptimizer::by_name(name);  // throws for unknown names
}

struct ExperimentConfig {
    std::filesystem::path manifest;
    std::string optimizer = "codoa";
    ParamOverrides params;
    RunConfig run{20, 200, 1};
    double sigma_min = 0.01;
    double sigma_max = 50.0;
    double c = 1.0;
    std::size_t runs = 5;
    std::filesystem::path out_dir;
    bool skip_failed = false;
    /// 0 disables the wall-time guard.
    double max_seconds = 0.0;
    /// New seeded split for every run instead of one split per experiment.
    bool reshuffle_per_run = false;
    /// Overrides the manifest's split_seed.
    std::optional<std::uint64_t> split_seed;
    std::size_t threads = 1;

    /// Population 90, 5000 iterations, 50 runs.
    void apply_paper_scale() {
        run.population_size = 90;
        run.max_iterations = 5000;
        runs = 50;
    }

    void validate() const {
        if (runs < 1) throw ConfigError("experiment: runs must be >= 1");
        if (!std::filesystem::is_regular_file(manifest))
            throw ConfigError("experiment: manifest '" + manifest.string() + "' not found");
        run.validate();
        SearchSpace::interval(sigma_min, sigma_max);
        if (!(sigma_min > 0.0)) throw ConfigError("experiment: sigma_min must be > 0");
        if (!(c > 0.0)) throw ConfigError("experiment: C must be > 0");
        if (threads < 1) throw ConfigError("experiment: threads must be >= 1");
        make_optimizer(optimizer, params);
    }

    /// Per-run optimizer seed: a counter scheme over the master seed.
    std::uint64_t run_seed(std::size_t r) const { return derive_seed(run.seed, r); }

    std::uint64_t run_split_seed(std::size_t r, std::uint64_t base) const {
        return reshuffle_per_run ? derive_seed(base, 0x5eed0000ULL + r) : base;
    }
};

struct RunRecord {
    std::size_t run = 0;
    std::uint64_t seed = 0;
    std::uint64_t split_seed = 0;
    double best_sigma = 0.0;
    double train_accuracy = 0.0;
    DiagnosisCounts counts;
    double accuracy = 0.0;
    std::size_t evaluations = 0;
    std::size_t warnings = 0;
    /// ok | failed | incomplete
    std::string status = "incomplete";
    std::string error;
    double wall_seconds = 0.0;

    bool ok() const { return status == "ok"; }
};

struct AggregateReport {
    std::string dataset;
    std::string optimizer;
    ExperimentConfig config;
    std::vector<RunRecord> records;
    std::size_t test_size = 0;
    double mean_td = std::nan("");
    double mean_fd = std::nan("");
    double mean_accuracy = std::nan("");
    std::size_t completed = 0;
    std::string version = kVersion;
    /// Final model of the run with the highest training accuracy.
    std::optional<SavedModel> best_model;
};

/// Arithmetic means over the records with status ok.
inline void aggregate(AggregateReport& rep) {
    double td = 0.0, fd = 0.0, acc = 0.0;
    std::size_t n = 0;
    for (const auto& r : rep.records) {
        if (!r.ok()) continue;
        td += static_cast<double>(r.counts.true_diagnosis);
        fd += static_cast<double>(r.counts.false_diagnosis);
        acc += r.accuracy;
        ++n;
    }
    rep.completed = n;
    if (n == 0) return;
    rep.mean_td = td / static_cast<double>(n);
    rep.mean_fd = fd / static_cast<double>(n);
    rep.mean_accuracy = acc / static_cast<double>(n);
}

namespace experiment_detail {

struct DeadlineExceeded {};

struct SplitContext {
    PreparedData data;
    std::unique_ptr<SvmAccuracyObjective> objective;
};

}  // namespace experiment_detail

/// Runs `config.runs` independent optimizations. Runs may execute on
/// `config.threads` workers; records are merged by run index, so the
/// result does not depend on the thread count.
inline AggregateReport run_experiment(const ExperimentConfig& config) {
    using namespace experiment_detail;
    using clock = std::chrono::steady_clock;
    config.validate();
    const DatasetManifest manifest = DatasetManifest::load(config.manifest);
    const LoadedData loaded = load(manifest);
    const std::uint64_t base_split_seed = config.split_seed.value_or(manifest.split_seed);
    const SearchSpace space = SearchSpace::interval(config.sigma_min, config.sigma_max);
    SvmOptions svm;
    svm.c = config.c;

    AggregateReport rep;
    rep.dataset = manifest.name;
    rep.optimizer = config.optimizer;
    rep.config = config;
    rep.records.resize(config.runs);

    // One prepared split (and its precomputed distances) per distinct split seed.
    std::mutex split_mutex;
    std::map<std::uint64_t, std::shared_ptr<SplitContext>> splits;
    auto context_for = [&](std::uint64_t split_seed) {
        std::lock_guard lock(split_mutex);
        if (const auto it = splits.find(split_seed); it != splits.end()) return it->second;
        // Built fully before insertion, so a failed split leaves no entry.
        auto ctx = std::make_shared<SplitContext>();
        ctx->data = split_and_prepare(loaded, manifest, split_seed);
        ctx->objective = std::make_unique<SvmAccuracyObjective>(ctx->data.train, ctx->data.train, KernelFamily::rbf, svm);
        splits.emplace(split_seed, ctx);
        return ctx;
    };

    const auto start = clock::now();
    const bool has_deadline = config.max_seconds > 0.0;
    const auto deadline = start + std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(config.max_seconds));
    const AnyOptimizer optimizer = make_optimizer(config.optimizer, config.params);
    std::mutex model_mutex;
    std::optional<std::pair<double, std::size_t>> best_key;
    std::atomic<bool> abort{false};

    auto do_run = [&](std::size_t r) {
        RunRecord& rec = rep.records[r];
        rec.run = r;
        rec.seed = config.run_seed(r);
        rec.split_seed = manifest.separate_files() ? 0 : config.run_split_seed(r, base_split_seed);
        if (abort.load() || (has_deadline && clock::now() > deadline)) {
            rec.status = "incomplete";
            return;
        }
        const auto t0 = clock::now();
        try {
            const auto ctx = context_for(rec.split_seed);
            const SvmAccuracyObjective& fitness = *ctx->objective;
            const std::size_t warnings_before = fitness.warning_count();
            Objective objective = [&](std::span<const double> x) {
                if (has_deadline && clock::now() > deadline) throw DeadlineExceeded{};
                return fitness(x);
            };
            RunConfig rc = config.run;
            rc.seed = rec.seed;
            const OptimizerResult res = run(optimizer, space, rc, objective);
            rec.best_sigma = res.best_position[0];
            rec.train_accuracy = res.best_fitness;
            rec.evaluations = res.evaluations;

            const MulticlassSvm model = fitness.train_model(rec.best_sigma);
            const Matrix test_sq = pairwise_squared_distances(ctx->data.test.features, ctx->data.train.features);
            rec.counts = count_diagnoses(model.predict_all(ctx->data.test.features, &test_sq), ctx->data.test.labels);
            rec.accuracy = accuracy(rec.counts);
            rec.warnings = fitness.warning_count() - warnings_before;
            rec.status = "ok";

            std::lock_guard lock(model_mutex);
            rep.test_size = ctx->data.test.size();
            const std::pair<double, std::size_t> key{-rec.train_accuracy, r};
            if (!best_key || key < *best_key) {
                best_key = key;
                rep.best_model = SavedModel{manifest.name, ctx->data.train.class_names, model};
            }
        } catch (const DeadlineExceeded&) {
            rec.status = "incomplete";
            rec.error = "wall-time budget exhausted";
        } catch (const std::exception& e) {
            rec.status = "failed";
            rec.error = e.what();
            if (!config.skip_failed) abort = true;
        }
        rec.wall_seconds = std::chrono::duration<double>(clock::now() - t0).count();
    };

    if (config.threads <= 1 || config.runs == 1) {
        for (std::size_t r = 0; r < config.runs; ++r) do_run(r);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        for (std::size_t t = 0; t < std::min(config.threads, config.runs); ++t) {
            workers.emplace_back([&] {
                for (std::size_t r = next++; r < config.runs; r = next++) do_run(r);
            });
        }
        for (auto& w : workers) w.join();
    }

    for (const auto& rec : rep.records) {
        if (rec.status == "failed" && !config.skip_failed)
            throw RunError("run " + std::to_string(rec.run) + " failed: " + rec.error);
    }
    aggregate(rep);
    return rep;
}

// ---------------------------------------------------------------------------
// Report files

namespace report_detail {

inline std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string fixed2(double v) { return std::isnan(v) ? std::string("nan") : format2(v); }

}  // namespace report_detail

/// Per-run records as CSV. Wall times are kept out of this file so that a
/// fixed seed reproduces it byte for byte; see timings_csv.
inline std::string records_csv(const AggregateReport& rep) {
    using namespace report_detail;
    std::ostringstream out;
    out << "run,seed,split_seed,best_sigma,train_accuracy,td,fd,accuracy,evaluations,warnings,status\n";
    for (const auto& r : rep.records) {
        out << r.run << ',' << r.seed << ',' << r.split_seed << ',' << g17(r.best_sigma) << ','
            << g17(r.train_accuracy) << ',' << r.counts.true_diagnosis << ',' << r.counts.false_diagnosis << ','
            << (r.ok() ? format_accuracy(r.counts) : std::string("nan")) << ',' << r.evaluations << ','
            << r.warnings << ',' << r.status << '\n';
    }
    return out.str();
}

inline std::string timings_csv(const AggregateReport& rep) {
    std::ostringstream out;
    out << "run,wall_seconds\n";
    for (const auto& r : rep.records) out << r.run << ',' << report_detail::g17(r.wall_seconds) << '\n';
    return out.str();
}

inline nlohmann::json to_json(const AggregateReport& rep) {
    nlohmann::json records = nlohmann::json::array();
    for (const auto& r : rep.records) {
        records.push_back({{"run", r.run},
                           {"seed", r.seed},
                           {"split_seed", r.split_seed},
                           {"best_sigma", r.best_sigma},
                           {"train_accuracy", r.train_accuracy},
                           {"td", r.counts.true_diagnosis},
                           {"fd", r.counts.false_diagnosis},
                           {"accuracy", r.accuracy},
                           {"evaluations", r.evaluations},
                           {"warnings", r.warnings},
                           {"status", r.status},
                           {"error", r.error}});
    }
    const auto& c = rep.config;
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : c.params) params[k] = v;
    auto num_or_null = [](double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); };
    return {{"version", rep.version},
            {"dataset", rep.dataset},
            {"optimizer", rep.optimizer},
            {"config",
             {{"manifest", c.manifest.generic_string()},
              {"particles", c.run.population_size},
              {"iterations", c.run.max_iterations},
              {"seed", c.run.seed},
              {"runs", c.runs},
              {"sigma_min", c.sigma_min},
              {"sigma_max", c.sigma_max},
              {"c", c.c},
              {"params", params},
              {"reshuffle_per_run", c.reshuffle_per_run},
              {"split_seed", c.split_seed ? nlohmann::json(*c.split_seed) : nlohmann::json(nullptr)}}},
            {"test_size", rep.test_size},
            {"completed", rep.completed},
            {"mean_td", num_or_null(rep.mean_td)},
            {"mean_fd", num_or_null(rep.mean_fd)},
            {"mean_accuracy", num_or_null(rep.mean_accuracy)},
            {"records", records}};
}

inline AggregateReport report_from_json(const nlohmann::json& j) {
    AggregateReport rep;
    rep.version = j.value("version", "");
    rep.dataset = j.at("dataset").get<std::string>();
    rep.optimizer = j.at("optimizer").get<std::string>();
    const auto& c = j.at("config");
    rep.config.optimizer = rep.optimizer;
    rep.config.manifest = c.value("manifest", "");
    rep.config.run.population_size = c.value("particles", std::size_t{0});
    rep.config.run.max_iterations = c.value("iterations", std::size_t{0});
    rep.config.run.seed = c.value("seed", std::uint64_t{0});
    rep.config.runs = c.at("runs").get<std::size_t>();
    rep.config.sigma_min = c.value("sigma_min", 0.0);
    rep.config.sigma_max = c.value("sigma_max", 0.0);
    rep.config.c = c.value("c", 1.0);
    rep.test_size = j.value("test_size", std::size_t{0});
    for (const auto& r : j.at("records")) {
        RunRecord rec;
        rec.run = r.at("run").get<std::size_t>();
        rec.seed = r.at("seed").get<std::uint64_t>();
        rec.split_seed = r.value("split_seed", std::uint64_t{0});
        rec.best_sigma = r.at("best_sigma").get<double>();
        rec.train_accuracy = r.at("train_accuracy").get<double>();
        rec.counts = {r.at("td").get<std::uint64_t>(), r.at("fd").get<std::uint64_t>()};
        rec.accuracy = r.at("accuracy").get<double>();
        rec.evaluations = r.value("evaluations", std::size_t{0});
        rec.warnings = r.value("warnings", std::size_t{0});
        rec.status = r.at("status").get<std::string>();
        rec.error = r.value("error", "");
        rep.records.push_back(std::move(rec));
    }
    aggregate(rep);
    return rep;
}

/// Human-readable summary in the layout of a diagnosis table.
inline std::string summary_text(const AggregateReport& rep) {
    using report_detail::fixed2;
    std::ostringstream out;
    out << rep.version << "\n"
        << "dataset: " << rep.dataset << "   optimizer: " << rep.optimizer << "   runs: " << rep.records.size()
        << " (completed " << rep.completed << ")\n"
        << "particles: " << rep.config.run.population_size << "   iterations: " << rep.config.run.max_iterations
        << "   seed: " << rep.config.run.seed << "   sigma: [" << rep.config.sigma_min << ", " << rep.config.sigma_max
        << "]   C: " << rep.config.c << "\n\n";
    char line[256];
    std::snprintf(line, sizeof line, "%-5s %-14s %-12s %6s %6s %9s  %s\n", "run", "best_sigma", "train_acc", "TD", "FD",
                  "accuracy", "status");
    out << line;
    for (const auto& r : rep.records) {
        std::snprintf(line, sizeof line, "%-5zu %-14.6g %-12s %6llu %6llu %9s  %s\n", r.run, r.best_sigma,
                      fixed2(r.train_accuracy).c_str(), static_cast<unsigned long long>(r.counts.true_diagnosis),
                      static_cast<unsigned long long>(r.counts.false_diagnosis),
                      r.ok() ? format_accuracy(r.counts).c_str() : "-", r.status.c_str());
        out << line;
    }
    std::snprintf(line, sizeof line, "%-5s %-14s %-12s %6s %6s %9s\n", "mean", "", "", fixed2(rep.mean_td).c_str(),
                  fixed2(rep.mean_fd).c_str(), fixed2(rep.mean_accuracy).c_str());
    out << line;
    return out.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << content;
}

/// records.csv, report.json, summary.txt and timings.csv under `dir`.
inline void write_report(const AggregateReport& rep, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_text(dir / "records.csv", records_csv(rep));
    write_text(dir / "report.json", to_json(rep).dump(2) + "\n");
    write_text(dir / "summary.txt", summary_text(rep));
    write_text(dir / "timings.csv", timings_csv(rep));
}

inline AggregateReport read_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read report " + path.string());
    try {
        return report_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw DataError("report " + path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Comparison and plot data

struct ComparisonRow {
    std::string optimizer;
    double mean_td = 0.0;
    double mean_fd = 0.0;
    double mean_accuracy = 0.0;
    bool best_td = false;
    bool best_fd = false;
    bool best_accuracy = false;
};

struct ComparisonTable {
    std::string dataset;
    std::size_t runs = 0;
    std::vector<ComparisonRow> rows;
};

/// One row per report. Best values (highest TD and accuracy, lowest FD,
/// compared at display precision) are marked; ties mark every holder.
inline ComparisonTable compare(const std::vector<AggregateReport>& reports) {
    if (reports.size() < 2) throw ConfigError("compare: need at least two reports");
    ComparisonTable t;
    t.dataset = reports.front().dataset;
    t.runs = reports.front().records.size();
    for (const auto& r : reports) {
        if (r.dataset != t.dataset) throw ConfigError("compare: reports cover different datasets");
        if (r.records.size() != t.runs) throw ConfigError("compare: reports differ in number of runs");
        t.rows.push_back({r.optimizer, r.mean_td, r.mean_fd, r.mean_accuracy, false, false, false});
    }
    double td = -1e300, fd = 1e300, acc = -1e300;
    for (const auto& row : t.rows) {
        td = std::max(td, round2(row.mean_td));
        fd = std::min(fd, round2(row.mean_fd));
        acc = std::max(acc, round2(row.mean_accuracy));
    }
    for (auto& row : t.rows) {
        row.best_td = round2(row.mean_td) == td;
        row.best_fd = round2(row.mean_fd) == fd;
        row.best_accuracy = round2(row.mean_accuracy) == acc;
    }
    return t;
}

/// Columns: optimizer, TD, FD, accuracy; best values carry a '*'.
inline std::string comparison_text(const ComparisonTable& t) {
    using report_detail::fixed2;
    std::ostringstream out;
    out << "dataset: " << t.dataset << "   runs: " << t.runs << "   (* = best)\n";
    char line[256];
    std::snprintf(line, sizeof line, "%-10s %10s %10s %10s\n", "optimizer", "TD", "FD", "accuracy");
    out << line;
    auto mark = [&](double v, bool best) { return fixed2(v) + (best ? "*" : " "); };
    for (const auto& r : t.rows) {
        std::snprintf(line, sizeof line, "%-10s %10s %10s %10s\n", r.optimizer.c_str(), mark(r.mean_td, r.best_td).c_str(),
                      mark(r.mean_fd, r.best_fd).c_str(), mark(r.mean_accuracy, r.best_accuracy).c_str());
        out << line;
    }
    return out.str();
}

inline std::string comparison_csv(const ComparisonTable& t) {
    using report_detail::fixed2;
    std::ostringstream out;
    out << "dataset,optimizer,mean_td,mean_fd,mean_accuracy,best_td,best_fd,best_accuracy\n";
    for (const auto& r : t.rows)
        out << t.dataset << ',' << r.optimizer << ',' << fixed2(r.mean_td) << ',' << fixed2(r.mean_fd) << ','
            << fixed2(r.mean_accuracy) << ',' << r.best_td << ',' << r.best_fd << ',' << r.best_accuracy << '\n';
    return out.str();
}

/// (dataset, optimizer, mean accuracy) rows for bar-chart tools.
inline std::string emit_plot_data(const std::vector<AggregateReport>& reports) {
    if (reports.empty()) throw ConfigError("plot-data: need at least one report");
    std::ostringstream out;
    out << "dataset,optimizer,mean_accuracy\n";
    for (const auto& r : reports) out << r.dataset << ',' << r.optimizer << ',' << report_detail::fixed2(r.mean_accuracy) << '\n';
    return out.str();
}

}  // namespace svmcodoa
