#pragma once

#include <string_view>
#include <utility>
#include <vector>

#include "svmcodoa/core.hpp"
#include "svmcodoa/rng.hpp"

namespace svmcodoa {

/// Real-coded GA: tournament selection, two-point crossover, Gaussian
/// mutation, elitism of one.
struct GaParams {
    double crossover_rate = 0.9;
    double mutation_rate = 0.1;
    std::size_t tournament_size = 3;
    /// Mutation standard deviation as a fraction of each dimension's range.
    double mutation_sigma = 0.1;

    void validate() const {
        if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) throw ConfigError("ga: crossover_rate must be in [0,1]");
        if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) throw ConfigError("ga: mutation_rate must be in [0,1]");
        if (tournament_size < 2) throw ConfigError("ga: tournament_size must be >= 2");
        if (!(mutation_sigma > 0.0)) throw ConfigError("ga: mutation_sigma must be > 0");
    }
};

struct GaState {
    std::vector<Vector> population;
    std::vector<double> fitness;
    Rng rng;
};

namespace ga_ops {

inline std::size_t tournament(const std::vector<double>& fitness, std::size_t k, Rng& rng) {
    std::size_t best = rng.below(fitness.size());
    for (std::size_t i = 1; i < k; ++i) {
        const std::size_t c = rng.below(fitness.size());
        if (fitness[c] > fitness[best]) best = c;
    }
    return best;
}

/// Two-point crossover in place. Cut points a < b are drawn from
/// [0, dim] and genes [a, b) are exchanged. With one gene the operator
/// reduces to swapping that gene.
inline void two_point_crossover(Vector& a, Vector& b, Rng& rng) {
    const std::size_t dim = a.size();
    if (dim == 1) {
        std::swap(a[0], b[0]);
        return;
    }
    std::size_t lo = rng.below(dim + 1);
    std::size_t hi = rng.below(dim + 1);
    if (lo > hi) std::swap(lo, hi);
    // Equal cut points still exchange one gene.
    if (lo == hi) {
        if (hi < dim) ++hi;
        else --lo;
    }
    for (std::size_t i = lo; i < hi; ++i) std::swap(a[i], b[i]);
}

inline void mutate(Vector& x, const GaParams& p, const SearchSpace& space, Rng& rng) {
    for (std::size_t d = 0; d < x.size(); ++d) {
        if (rng.uniform() < p.mutation_rate) x[d] = space.clamp(d, x[d] + rng.normal(0.0, p.mutation_sigma * space.range(d)));
    }
}

inline GaState init(const SearchSpace& space, std::size_t n, std::uint64_t seed, CountingObjective& f) {
    GaState s{{}, {}, Rng(seed)};
    for (std::size_t i = 0; i < n; ++i) s.population.push_back(random_point(space, s.rng));
    for (const auto& x : s.population) s.fitness.push_back(f(x));
    return s;
}

inline std::size_t best_index(const std::vector<double>& fitness) {
    std::size_t b = 0;
    for (std::size_t i = 1; i < fitness.size(); ++i)
        if (fitness[i] > fitness[b]) b = i;
    return b;
}

/// One generation. The elite is carried over unevaluated at index 0.
inline void step(GaState& s, const GaParams& p, const SearchSpace& space, CountingObjective& f) {
    const std::size_t n = s.population.size();
    const std::size_t elite = best_index(s.fitness);
    std::vector<Vector> next{s.population[elite]};
    std::vector<double> next_fit{s.fitness[elite]};
    next.reserve(n);
    while (next.size() < n) {
        Vector a = s.population[tournament(s.fitness, p.tournament_size, s.rng)];
        Vector b = s.population[tournament(s.fitness, p.tournament_size, s.rng)];
        if (s.rng.uniform() < p.crossover_rate) two_point_crossover(a, b, s.rng);
        mutate(a, p, space, s.rng);
        mutate(b, p, space, s.rng);
        next.push_back(std::move(a));
        if (next.size() < n) next.push_back(std::move(b));
    }
    for (std::size_t i = 1; i < n; ++i) next_fit.push_back(f(next[i]));
    s.population = std::move(next);
    s.fitness = std::move(next_fit);
}

}  // namespace ga_ops

class Ga {
public:
    Ga() = default;
    explicit Ga(GaParams params) : params_(params) {}

    std::string_view name() const noexcept { return "ga"; }

    OptimizerResult optimize(const SearchSpace& space, const RunConfig& config, const Objective& objective) const {
        params_.validate();
        CountingObjective f(objective);
        GaState s = ga_ops::init(space, config.population_size, config.seed, f);
        BestTracker best;
        for (std::size_t i = 0; i < s.population.size(); ++i) best.offer(s.population[i], s.fitness[i]);
        for (std::size_t it = 1; it <= config.max_iterations; ++it) {
            ga_ops::step(s, params_, space, f);
            for (std::size_t i = 0; i < s.population.size(); ++i) best.offer(s.population[i], s.fitness[i]);
            best.record(it);
        }
        return std::move(best).finish(f.count());
    }

private:
    GaParams params_;
};

}  // namespace svmcodoa
