#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "svmcodoa/core.hpp"
#include "svmcodoa/rng.hpp"

namespace svmcodoa {

/// DE/rand/1/bin.
struct DeParams {
    double differential_weight = 0.5;
    double crossover_prob = 0.9;

    void validate() const {
        if (!(differential_weight > 0.0 && differential_weight <= 2.0))
            throw ConfigError("de: differential_weight must be in (0, 2]");
        if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0)) throw ConfigError("de: crossover_prob must be in [0,1]");
    }
};

struct DeState {
    std::vector<Vector> population;
    std::vector<double> fitness;
    Rng rng;
};

namespace de_ops {

/// x_r1 + F * (x_r2 - x_r3).
inline Vector donor(const Vector& r1, const Vector& r2, const Vector& r3, double f) {
    Vector v(r1.size());
    for (std::size_t d = 0; d < v.size(); ++d) v[d] = r1[d] + f * (r2[d] - r3[d]);
    return v;
}

/// Three indices distinct from each other and from `target`.
inline std::array<std::size_t, 3> pick_three(std::size_t n, std::size_t target, Rng& rng) {
    std::array<std::size_t, 3> r{};
    for (std::size_t k = 0; k < 3; ++k) {
        for (;;) {
            const std::size_t c = rng.below(n);
            bool clash = c == target;
            for (std::size_t j = 0; j < k; ++j) clash = clash || r[j] == c;
            if (!clash) {
                r[k] = c;
                break;
            }
        }
    }
    return r;
}

inline DeState init(const SearchSpace& space, std::size_t n, std::uint64_t seed, CountingObjective& f) {
    if (n < 4) throw ConfigError("de: population must be >= 4");
    DeState s{{}, {}, Rng(seed)};
    for (std::size_t i = 0; i < n; ++i) s.population.push_back(random_point(space, s.rng));
    for (const auto& x : s.population) s.fitness.push_back(f(x));
    return s;
}

/// One synchronous generation; a trial replaces its target only if it is
/// not worse.
inline void step(DeState& s, const DeParams& p, const SearchSpace& space, CountingObjective& f) {
    const std::size_t n = s.population.size();
    const std::size_t dim = space.dim();
    auto next = s.population;
    auto next_fit = s.fitness;
    for (std::size_t i = 0; i < n; ++i) {
        const auto [r1, r2, r3] = pick_three(n, i, s.rng);
        const Vector v = donor(s.population[r1], s.population[r2], s.population[r3], p.differential_weight);
        const std::size_t forced = s.rng.below(dim);
        Vector trial = s.population[i];
        for (std::size_t d = 0; d < dim; ++d) {
            if (d == forced || s.rng.uniform() < p.crossover_prob) trial[d] = space.clamp(d, v[d]);
        }
        const double ft = f(trial);
        if (ft >= s.fitness[i]) {
            next[i] = std::move(trial);
            next_fit[i] = ft;
        }
    }
    s.population = std::move(next);
    s.fitness = std::move(next_fit);
}

}  // namespace de_ops

class De {
public:
    De() = default;
    explicit De(DeParams params) : params_(params) {}

    std::string_view name() const noexcept { return "de"; }

    OptimizerResult optimize(const SearchSpace& space, const RunConfig& config, const Objective& objective) const {
        params_.validate();
        CountingObjective f(objective);
        DeState s = de_ops::init(space, config.population_size, config.seed, f);
        BestTracker best;
        for (std::size_t i = 0; i < s.population.size(); ++i) best.offer(s.population[i], s.fitness[i]);
        for (std::size_t it = 1; it <= config.max_iterations; ++it) {
            de_ops::step(s, params_, space, f);
            for (std::size_t i = 0; i < s.population.size(); ++i) best.offer(s.population[i], s.fitness[i]);
            best.record(it);
        }
        return std::move(best).finish(f.count());
    }

private:
    DeParams params_;
};

}  // namespace svmcodoa
