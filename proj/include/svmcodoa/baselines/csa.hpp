#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string_view>
#include <vector>

#include "svmcodoa/core.hpp"
#include "svmcodoa/rng.hpp"

namespace svmcodoa {

/// Clonal selection (CLONALG-style) for continuous search.
struct CsaParams {
    /// Antibodies selected for cloning; 0 means population / 5 (at least 1).
    std::size_t select_n = 0;
    /// The antibody of rank k receives round(clone_factor * N / k) clones,
    /// at least one.
    double clone_factor = 0.1;
    /// Base hypermutation standard deviation as a fraction of the range.
    double mutation_scale = 0.1;
    /// Worst unselected antibodies replaced by random ones each generation;
    /// 0 means population / 10 (at least 1).
    std::size_t random_replacements = 0;

    void validate() const {
        if (!(clone_factor > 0.0)) throw ConfigError("csa: clone_factor must be > 0");
        if (!(mutation_scale > 0.0)) throw ConfigError("csa: mutation_scale must be > 0");
    }

    std::size_t selected(std::size_t population) const {
        const std::size_t n = select_n == 0 ? std::max<std::size_t>(1, population / 5) : select_n;
        if (n > population) throw ConfigError("csa: select_n exceeds population");
        return n;
    }

    std::size_t replacements(std::size_t population) const {
        return random_replacements == 0 ? std::max<std::size_t>(1, population / 10) : random_replacements;
    }
};

struct CsaState {
    std::vector<Vector> population;
    std::vector<double> fitness;
    Rng rng;
};

namespace csa_ops {

/// Mutation scale for the antibody of 1-based affinity rank `rank` among
/// `selected`: mutation_scale * exp(-a), where a is 1 for the best and 0
/// for the last selected.
inline double mutation_scale(std::size_t rank, std::size_t selected, double base) {
    const double a = selected <= 1 ? 1.0 : 1.0 - static_cast<double>(rank - 1) / static_cast<double>(selected - 1);
    return base * std::exp(-a);
}

inline std::size_t clone_count(std::size_t rank, std::size_t population, double clone_factor) {
    const double c = std::round(clone_factor * static_cast<double>(population) / static_cast<double>(rank));
    return std::max<std::size_t>(1, static_cast<std::size_t>(c));
}

/// Indices sorted by descending fitness, ties by index.
inline std::vector<std::size_t> rank_order(const std::vector<double>& fitness) {
    std::vector<std::size_t> order(fitness.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fitness[a] > fitness[b]; });
    return order;
}

inline CsaState init(const SearchSpace& space, std::size_t n, std::uint64_t seed, CountingObjective& f) {
    CsaState s{{}, {}, Rng(seed)};
    for (std::size_t i = 0; i < n; ++i) s.population.push_back(random_point(space, s.rng));
    for (const auto& x : s.population) s.fitness.push_back(f(x));
    return s;
}

/// One generation: clone and hypermutate the selected antibodies, keep
/// each family's best (the parent wins ties), then refresh the worst
/// unselected antibodies with random ones.
inline void step(CsaState& s, const CsaParams& p, const SearchSpace& space, CountingObjective& f) {
    const std::size_t n = s.population.size();
    const std::size_t selected = p.selected(n);
    const auto order = rank_order(s.fitness);

    for (std::size_t rank = 1; rank <= selected; ++rank) {
        const std::size_t parent = order[rank - 1];
        const double scale = mutation_scale(rank, selected, p.mutation_scale);
        const std::size_t clones = clone_count(rank, n, p.clone_factor);
        Vector best_x = s.population[parent];
        double best_f = s.fitness[parent];
        for (std::size_t c = 0; c < clones; ++c) {
            Vector x = s.population[parent];
            for (std::size_t d = 0; d < x.size(); ++d) x[d] = space.clamp(d, x[d] + s.rng.normal(0.0, scale * space.range(d)));
            const double fx = f(x);
            if (fx > best_f) {
                best_f = fx;
                best_x = std::move(x);
            }
        }
        s.population[parent] = std::move(best_x);
        s.fitness[parent] = best_f;
    }

    const std::size_t replace = std::min(p.replacements(n), n - selected);
    for (std::size_t k = 0; k < replace; ++k) {
        const std::size_t idx = order[n - 1 - k];
        s.population[idx] = random_point(space, s.rng);
        s.fitness[idx] = f(s.population[idx]);
    }
}

}  // namespace csa_ops

class Csa {
public:
    Csa() = default;
    explicit Csa(CsaParams params) : params_(params) {}

    std::string_view name() const noexcept { return "csa"; }

    OptimizerResult optimize(const SearchSpace& space, const RunConfig& config, const Objective& objective) const {
        params_.validate();
        CountingObjective f(objective);
        CsaState s = csa_ops::init(space, config.population_size, config.seed, f);
        BestTracker best;
        for (std::size_t i = 0; i < s.population.size(); ++i) best.offer(s.population[i], s.fitness[i]);
        for (std::size_t it = 1; it <= config.max_iterations; ++it) {
            csa_ops::step(s, params_, space, f);
            for (std::size_t i = 0; i < s.population.size(); ++i) best.offer(s.population[i], s.fitness[i]);
            best.record(it);
        }
        return std::move(best).finish(f.count());
    }

private:
    CsaParams params_;
};

}  // namespace svmcodoa
