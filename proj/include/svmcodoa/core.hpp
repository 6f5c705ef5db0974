#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace svmcodoa {

/// Base for every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters or configuration (maps to CLI exit code 1).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Accuracy requested over zero evaluated samples.
class EmptyEvaluationError : public Error {
public:
    EmptyEvaluationError() : Error("accuracy: no samples were evaluated") {}
};

using Vector = std::vector<double>;

/// Box-bounded continuous search space.
struct SearchSpace {
    Vector lower;
    Vector upper;

    SearchSpace() = default;
    SearchSpace(Vector lo, Vector hi) : lower(std::move(lo)), upper(std::move(hi)) { validate(); }

    /// One-dimensional [lo, hi].
    static SearchSpace interval(double lo, double hi) { return SearchSpace({lo}, {hi}); }

    std::size_t dim() const noexcept { return lower.size(); }
    double range(std::size_t i) const { return upper[i] - lower[i]; }

    void validate() const {
        if (lower.empty() || lower.size() != upper.size())
            throw ConfigError("search space: lower and upper must be non-empty and of equal length");
        for (std::size_t i = 0; i < lower.size(); ++i) {
            if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(lower[i] < upper[i]))
                throw ConfigError("search space: need finite lower[i] < upper[i] for every dimension");
        }
    }

    double clamp(std::size_t i, double x) const { return std::clamp(x, lower[i], upper[i]); }

    void clamp(std::span<double> x) const {
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = clamp(i, x[i]);
    }

    bool contains(std::span<const double> x) const {
        if (x.size() != dim()) return false;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
        return true;
    }
};

struct RunConfig {
    std::size_t population_size = 20;
    std::size_t max_iterations = 200;
    std::uint64_t seed = 0;

    void validate() const {
        if (population_size < 2) throw ConfigError("run config: population_size must be >= 2");
        if (max_iterations < 1) throw ConfigError("run config: max_iterations must be >= 1");
    }
};

struct Candidate {
    Vector position;
    std::optional<double> fitness;
};

struct HistoryEntry {
    std::size_t iteration;
    double best_fitness;

    bool operator==(const HistoryEntry&) const = default;
};

struct OptimizerResult {
    Vector best_position;
    double best_fitness = -std::numeric_limits<double>::infinity();
    std::vector<HistoryEntry> history;
    std::size_t evaluations = 0;

    bool operator==(const OptimizerResult&) const = default;
};

/// Objective to maximize. Must be deterministic in its argument.
using Objective = std::function<double(std::span<const double>)>;

/// Counts an objective's evaluations and maps NaN to -inf so a broken
/// evaluation can never become the best.
class CountingObjective {
public:
    explicit CountingObjective(const Objective& f) : f_(f) {}

    double operator()(std::span<const double> x) {
        ++count_;
        const double v = f_(x);
        return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
    }

    std::size_t count() const noexcept { return count_; }

private:
    const Objective& f_;
    std::size_t count_ = 0;
};

/// Best-so-far bookkeeping shared by every optimizer. Only a strictly
/// better fitness replaces the incumbent, so the history is monotone.
class BestTracker {
public:
    bool offer(std::span<const double> position, double fitness) {
        if (!has_ || fitness > fitness_) {
            position_.assign(position.begin(), position.end());
            fitness_ = fitness;
            has_ = true;
            return true;
        }
        return false;
    }

    void record(std::size_t iteration) { history_.push_back({iteration, fitness_}); }

    bool has_value() const noexcept { return has_; }
    double fitness() const noexcept { return fitness_; }
    const Vector& position() const noexcept { return position_; }

    OptimizerResult finish(std::size_t evaluations) && {
        return {std::move(position_), fitness_, std::move(history_), evaluations};
    }

private:
    Vector position_;
    double fitness_ = -std::numeric_limits<double>::infinity();
    bool has_ = false;
    std::vector<HistoryEntry> history_;
};

/// Anything run() can drive.
template <typename O>
concept Optimizer = requires(const O& opt, const SearchSpace& space, const RunConfig& config,
                             const Objective& objective) {
    { opt.name() } -> std::convertible_to<std::string_view>;
    { opt.optimize(space, config, objective) } -> std::same_as<OptimizerResult>;
};

/// Validates inputs, runs the optimizer for exactly config.max_iterations
/// iterations and checks the result contract.
template <Optimizer O>
OptimizerResult run(const O& optimizer, const SearchSpace& space, const RunConfig& config,
                    const Objective& objective) {
    space.validate();
    config.validate();
    OptimizerResult result = optimizer.optimize(space, config, objective);
    if (result.history.size() != config.max_iterations)
        throw std::logic_error(std::string(optimizer.name()) + ": history length differs from max_iterations");
    if (result.history.back().best_fitness != result.best_fitness)
        throw std::logic_error(std::string(optimizer.name()) + ": best_fitness differs from last history entry");
    return result;
}

/// Uniform random point in the space.
template <typename R>
Vector random_point(const SearchSpace& space, R& rng) {
    Vector x(space.dim());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(space.lower[i], space.upper[i]);
    return x;
}

// ---------------------------------------------------------------------------
// Diagnosis accuracy

struct DiagnosisCounts {
    std::uint64_t true_diagnosis = 0;
    std::uint64_t false_diagnosis = 0;

    std::uint64_t total() const noexcept { return true_diagnosis + false_diagnosis; }

    DiagnosisCounts& operator+=(const DiagnosisCounts& o) noexcept {
        true_diagnosis += o.true_diagnosis;
        false_diagnosis += o.false_diagnosis;
        return *this;
    }

    bool operator==(const DiagnosisCounts&) const = default;
};

/// 100 * TD / (TD + FD).
inline double accuracy(const DiagnosisCounts& c) {
    if (c.total() == 0) throw EmptyEvaluationError();
    return 100.0 * static_cast<double>(c.true_diagnosis) / static_cast<double>(c.total());
}

inline double accuracy(std::uint64_t td, std::uint64_t fd) { return accuracy(DiagnosisCounts{td, fd}); }

/// Accuracy in hundredths of a percent, rounded half-up in exact integer
/// arithmetic (so 939/972 -> 9660).
inline std::uint64_t accuracy_hundredths(const DiagnosisCounts& c) {
    if (c.total() == 0) throw EmptyEvaluationError();
    const unsigned __int128 num = static_cast<unsigned __int128>(20000) * c.true_diagnosis + c.total();
    return static_cast<std::uint64_t>(num / (static_cast<unsigned __int128>(2) * c.total()));
}

/// Half-up rounding to 2 decimals for values that are not integer ratios
/// (e.g. means over runs). The nudge absorbs representation error such as
/// 89.085 being stored as 89.08499999.
inline double round2(double x) {
    const double scaled = x * 100.0;
    return std::floor(scaled + 0.5 + 1e-9 * std::max(1.0, std::fabs(scaled))) / 100.0;
}

/// Fixed 2-decimal display of a percentage.
inline std::string format2(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", round2(x));
    return buf;
}

inline std::string format_accuracy(const DiagnosisCounts& c) {
    const std::uint64_t h = accuracy_hundredths(c);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%llu.%02llu", static_cast<unsigned long long>(h / 100),
                  static_cast<unsigned long long>(h % 100));
    return buf;
}

}  // namespace svmcodoa
