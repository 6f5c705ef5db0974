#pragma once

#include <algorithm>
#include <string_view>
#include <vector>

#include "svmcodoa/core.hpp"
#include "svmcodoa/rng.hpp"

namespace svmcodoa {

/// Global-best PSO with inertia weight and velocity clamping.
struct PsoParams {
    double inertia = 0.729;
    double cognitive = 1.49445;
    double social = 1.49445;
    /// Velocity limit as a fraction of each dimension's range.
    double v_max = 0.5;

    void validate() const {
        if (!(inertia > 0.0 && cognitive > 0.0 && social > 0.0)) throw ConfigError("pso: w, c1, c2 must be > 0");
        if (!(v_max > 0.0)) throw ConfigError("pso: v_max must be > 0");
    }
};

struct PsoState {
    std::vector<Vector> position;
    std::vector<Vector> velocity;
    std::vector<Vector> personal_best;
    std::vector<double> personal_best_fitness;
    Vector global_best;
    double global_best_fitness = -std::numeric_limits<double>::infinity();
    Rng rng;
};

namespace pso_ops {

/// w*v + c1*u1*(pbest - x) + c2*u2*(gbest - x), before clamping.
constexpr double velocity(double v, double x, double pbest, double gbest, double w, double c1, double c2, double u1,
                          double u2) noexcept {
    return w * v + c1 * u1 * (pbest - x) + c2 * u2 * (gbest - x);
}

inline void update_global(PsoState& s) {
    for (std::size_t i = 0; i < s.personal_best.size(); ++i) {
        if (s.global_best.empty() || s.personal_best_fitness[i] > s.global_best_fitness) {
            s.global_best = s.personal_best[i];
            s.global_best_fitness = s.personal_best_fitness[i];
        }
    }
}

inline PsoState init(const SearchSpace& space, std::size_t n, std::uint64_t seed, CountingObjective& f) {
    PsoState s;
    s.rng = Rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        s.position.push_back(random_point(space, s.rng));
        s.velocity.emplace_back(space.dim(), 0.0);
    }
    s.personal_best = s.position;
    for (const auto& x : s.position) s.personal_best_fitness.push_back(f(x));
    update_global(s);
    return s;
}

/// Move every particle, then evaluate and update personal and global
/// bests (synchronous update).
inline void step(PsoState& s, const PsoParams& p, const SearchSpace& space, CountingObjective& f) {
    for (std::size_t i = 0; i < s.position.size(); ++i) {
        auto& x = s.position[i];
        auto& v = s.velocity[i];
        for (std::size_t d = 0; d < x.size(); ++d) {
            const double u1 = s.rng.uniform();
            const double u2 = s.rng.uniform();
            const double vmax = p.v_max * space.range(d);
            v[d] = std::clamp(velocity(v[d], x[d], s.personal_best[i][d], s.global_best[d], p.inertia, p.cognitive,
                                       p.social, u1, u2),
                              -vmax, vmax);
            x[d] = space.clamp(d, x[d] + v[d]);
        }
    }
    for (std::size_t i = 0; i < s.position.size(); ++i) {
        const double fx = f(s.position[i]);
        if (fx > s.personal_best_fitness[i]) {
            s.personal_best[i] = s.position[i];
            s.personal_best_fitness[i] = fx;
        }
    }
    update_global(s);
}

}  // namespace pso_ops

class Pso {
public:
    Pso() = default;
    explicit Pso(PsoParams params) : params_(params) {}

    std::string_view name() const noexcept { return "pso"; }

    OptimizerResult optimize(const SearchSpace& space, const RunConfig& config, const Objective& objective) const {
        params_.validate();
        CountingObjective f(objective);
        PsoState s = pso_ops::init(space, config.population_size, config.seed, f);
        BestTracker best;
        best.offer(s.global_best, s.global_best_fitness);
        for (std::size_t it = 1; it <= config.max_iterations; ++it) {
            pso_ops::step(s, params_, space, f);
            best.offer(s.global_best, s.global_best_fitness);
            best.record(it);
        }
        return std::move(best).finish(f.count());
    }

private:
    PsoParams params_;
};

}  // namespace svmcodoa
