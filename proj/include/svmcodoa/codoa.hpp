#pragma once

// Cognitive Development Optimization Algorithm.
//
// One iteration runs the phases in a fixed order:
//   socialization -> ir_decay_all -> move_particles -> refresh_best
//   -> maturation -> rationalizing -> balancing
// Every random draw comes from the Rng stored in CodoaState, so a copied
// state continues identically.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "svmcodoa/core.hpp"
#include "svmcodoa/rng.hpp"

namespace svmcodoa {

struct CodoaParams {
    std::size_t n_particles = 90;
    double initial_ir = 0.5;
    int rationality_rate = 2;
    int maturity_limit = 3;
    double ir_max = 10.0;
    /// Floor applied to every ir; also guards the division in the
    /// best-ratio renewal.
    double ir_min = 1e-6;

    void validate() const {
        if (n_particles < 2) throw ConfigError("codoa: n_particles must be >= 2");
        if (!(initial_ir > 0.0) || !(initial_ir <= ir_max)) throw ConfigError("codoa: need 0 < initial_ir <= ir_max");
        if (!(ir_min >= 0.0) || !(ir_min <= initial_ir)) throw ConfigError("codoa: need 0 <= ir_min <= initial_ir");
        if (rationality_rate < 1) throw ConfigError("codoa: rationality_rate must be >= 1");
    }
};

// The twelve ir/position update equations reduce to four formulas.
namespace codoa_rule {

/// ir + u * ir. Best-particle renewal and the socialization/maturation
/// renewals.
constexpr double grow(double ir, double u) noexcept { return ir + u * ir; }

/// u * ir. Whole-population decay in ir_decay_all and balancing.
constexpr double decay(double ir, double u) noexcept { return u * ir; }

/// ir + u * (best_ir / ir), with ir floored at `floor` in the divisor.
constexpr double toward_best_ratio(double ir, double best_ir, double u, double floor) noexcept {
    const double denom = ir < floor ? floor : ir;
    return ir + u * (best_ir / denom);
}

/// pos + u * (ir * (target - pos)).
constexpr double step(double pos, double target, double ir, double u) noexcept {
    return pos + u * (ir * (target - pos));
}

}  // namespace codoa_rule

struct CodoaParticle {
    Vector position;
    double fitness = -std::numeric_limits<double>::infinity();
    double ir = 0.0;
    int ex = 0;
    /// Position changed since fitness was last computed.
    bool stale = true;

    bool operator==(const CodoaParticle&) const = default;
};

struct CodoaState {
    std::vector<CodoaParticle> particles;
    /// Best position ever seen; never regresses.
    CodoaParticle global_best;
    /// Index of the current best particle (lowest index among ties).
    std::size_t best_index = 0;
    std::size_t iteration = 0;
    std::size_t evaluations = 0;
    /// Number of best-particle renewals (ir grow + ex increment) so far.
    std::size_t best_renewals = 0;
    Rng rng;

    const CodoaParticle& best() const { return particles[best_index]; }
};

/// Everything the phases need besides the state.
struct CodoaEnv {
    const CodoaParams& params;
    const SearchSpace& space;
    const Objective& objective;
    /// Extension point at the end of balancing ("in-system optimization").
    /// Empty by default, which leaves the state untouched.
    std::function<void(CodoaState&)> balancing_hook = {};
};

namespace codoa_detail {

inline double clamp_ir(double ir, const CodoaParams& p) { return std::clamp(ir, p.ir_min, p.ir_max); }

inline void evaluate_stale(CodoaState& s, const CodoaEnv& env) {
    for (auto& p : s.particles) {
        if (!p.stale) continue;
        const double v = env.objective(p.position);
        p.fitness = std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
        p.stale = false;
        ++s.evaluations;
    }
}

inline void select_best(CodoaState& s) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < s.particles.size(); ++i)
        if (s.particles[i].fitness > s.particles[best].fitness) best = i;
    s.best_index = best;
    if (s.particles[best].fitness > s.global_best.fitness || s.global_best.position.empty())
        s.global_best = s.particles[best];
}

/// Grow the best particle's ir and credit it one unit of experience.
inline void renew_best(CodoaState& s, const CodoaParams& p) {
    auto& b = s.particles[s.best_index];
    b.ir = clamp_ir(codoa_rule::grow(b.ir, s.rng.uniform()), p);
    b.ex += 1;
    ++s.best_renewals;
}

inline void move_toward_global_best(CodoaParticle& particle, CodoaState& s, const SearchSpace& space) {
    for (std::size_t d = 0; d < particle.position.size(); ++d) {
        const double next =
            codoa_rule::step(particle.position[d], s.global_best.position[d], particle.ir, s.rng.uniform());
        particle.position[d] = space.clamp(d, next);
    }
    particle.stale = true;
}

}  // namespace codoa_detail

/// Throws std::logic_error if any particle violates the state invariants
/// (finite ir in [ir_min, ir_max], position inside the space, finite or
/// -inf fitness).
inline void check_invariants(const CodoaState& s, const CodoaEnv& env) {
    for (const auto& p : s.particles) {
        if (!std::isfinite(p.ir) || p.ir < env.params.ir_min || p.ir > env.params.ir_max)
            throw std::logic_error("codoa: ir outside [ir_min, ir_max]");
        if (!env.space.contains(p.position)) throw std::logic_error("codoa: particle outside search space");
        if (std::isnan(p.fitness)) throw std::logic_error("codoa: NaN fitness");
    }
    if (s.best_index >= s.particles.size()) throw std::logic_error("codoa: best index out of range");
}

/// Random spread, first evaluation, then the first best renewal.
inline CodoaState initialize(const CodoaEnv& env, std::uint64_t seed) {
    env.params.validate();
    env.space.validate();
    CodoaState s;
    s.rng = Rng(seed);
    s.particles.resize(env.params.n_particles);
    for (auto& p : s.particles) {
        p.position = random_point(env.space, s.rng);
        p.ir = codoa_detail::clamp_ir(env.params.initial_ir, env.params);
        p.ex = 0;
        p.stale = true;
    }
    codoa_detail::evaluate_stale(s, env);
    codoa_detail::select_best(s);
    codoa_detail::renew_best(s, env.params);
    return s;
}

/// Particles at or below the average fitness lose one ex and grow their
/// ir; the rest gain one ex. The average includes the best particle.
inline void socialization(CodoaState& s, const CodoaEnv& env) {
    // Averaging offsets from the minimum keeps an all-equal population
    // exactly at its average.
    double lo = s.particles.front().fitness;
    for (const auto& p : s.particles) lo = std::min(lo, p.fitness);
    double average = lo;
    if (std::isfinite(lo)) {
        double sum = 0.0;
        for (const auto& p : s.particles) sum += p.fitness - lo;
        average = lo + sum / static_cast<double>(s.particles.size());
    }
    for (auto& p : s.particles) {
        if (p.fitness <= average) {
            p.ex -= 1;
            p.ir = codoa_detail::clamp_ir(codoa_rule::grow(p.ir, s.rng.uniform()), env.params);
        } else {
            p.ex += 1;
        }
    }
}

inline void ir_decay_all(CodoaState& s, const CodoaEnv& env) {
    for (auto& p : s.particles) p.ir = codoa_detail::clamp_ir(codoa_rule::decay(p.ir, s.rng.uniform()), env.params);
}

/// Every particle except the current best steps toward the global best.
inline void move_particles(CodoaState& s, const CodoaEnv& env) {
    for (std::size_t i = 0; i < s.particles.size(); ++i) {
        if (i == s.best_index) continue;
        codoa_detail::move_toward_global_best(s.particles[i], s, env.space);
    }
}

/// Evaluate moved particles, update the bests, renew the best particle.
inline void refresh_best(CodoaState& s, const CodoaEnv& env) {
    codoa_detail::evaluate_stale(s, env);
    codoa_detail::select_best(s);
    codoa_detail::renew_best(s, env.params);
}

/// Particles with ex <= maturity_limit grow their ir; then the best
/// particle is renewed.
inline void maturation(CodoaState& s, const CodoaEnv& env) {
    for (auto& p : s.particles) {
        if (p.ex <= env.params.maturity_limit)
            p.ir = codoa_detail::clamp_ir(codoa_rule::grow(p.ir, s.rng.uniform()), env.params);
    }
    refresh_best(s, env);
}

/// ex < 0: one best-ratio ir renewal plus a step toward the global best.
/// ex >= 0: the best-ratio renewal applied rationality_rate times.
/// best_ir is read once, before any particle is updated.
inline void rationalizing(CodoaState& s, const CodoaEnv& env) {
    const double best_ir = s.best().ir;
    const auto& p = env.params;
    for (auto& particle : s.particles) {
        if (particle.ex < 0) {
            particle.ir =
                codoa_detail::clamp_ir(codoa_rule::toward_best_ratio(particle.ir, best_ir, s.rng.uniform(), p.ir_min), p);
            codoa_detail::move_toward_global_best(particle, s, env.space);
        } else {
            for (int k = 0; k < p.rationality_rate; ++k)
                particle.ir = codoa_detail::clamp_ir(
                    codoa_rule::toward_best_ratio(particle.ir, best_ir, s.rng.uniform(), p.ir_min), p);
        }
    }
}

/// Population-wide decay, then evaluation and best renewal. Advances the
/// iteration counter.
inline void balancing(CodoaState& s, const CodoaEnv& env) {
    ir_decay_all(s, env);
    refresh_best(s, env);
    if (env.balancing_hook) env.balancing_hook(s);
    ++s.iteration;
}

/// One full iteration, with invariant checks after every phase.
inline void iterate(CodoaState& s, const CodoaEnv& env) {
    using Phase = void (*)(CodoaState&, const CodoaEnv&);
    static constexpr Phase phases[] = {socialization, ir_decay_all, move_particles, refresh_best,
                                       maturation,    rationalizing, balancing};
    for (Phase phase : phases) {
        phase(s, env);
        check_invariants(s, env);
    }
}

/// Full run. The swarm size comes from config.population_size.
inline OptimizerResult codoa_run(CodoaParams params, const SearchSpace& space, const RunConfig& config,
                                 const Objective& objective) {
    config.validate();
    params.n_particles = config.population_size;
    const CodoaEnv env{params, space, objective};
    CodoaState s = initialize(env, config.seed);
    check_invariants(s, env);

    OptimizerResult result;
    result.history.reserve(config.max_iterations);
    for (std::size_t it = 0; it < config.max_iterations; ++it) {
        iterate(s, env);
        result.history.push_back({it + 1, s.global_best.fitness});
    }
    result.best_position = s.global_best.position;
    result.best_fitness = s.global_best.fitness;
    result.evaluations = s.evaluations;
    return result;
}

class Codoa {
public:
    Codoa() = default;
    explicit Codoa(CodoaParams params) : params_(params) {}

    std::string_view name() const noexcept { return "codoa"; }
    const CodoaParams& params() const noexcept { return params_; }

    OptimizerResult optimize(const SearchSpace& space, const RunConfig& config, const Objective& objective) const {
        return codoa_run(params_, space, config, objective);
    }

private:
    CodoaParams params_;
};

}  // namespace svmcodoa
