#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "svmcodoa/svmcodoa.hpp"
#include "test_util.hpp"

using namespace svmcodoa;

namespace {

const Objective kQuadratic = testutil::quadratic;

/// Sum of squares to a point, maximized at `target`, in 3-D.
double bowl(std::span<const double> x) {
    const double t[3] = {1.0, -2.0, 0.5};
    double s = 0.0;
    for (int d = 0; d < 3; ++d) s -= (x[d] - t[d]) * (x[d] - t[d]);
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// GA

TEST(GaParams, Validation) {
    EXPECT_NO_THROW(GaParams{}.validate());
    GaParams p;
    p.crossover_rate = 1.5;
    EXPECT_THROW(p.validate(), ConfigError);
    p = {};
    p.mutation_rate = -0.1;
    EXPECT_THROW(p.validate(), ConfigError);
    p = {};
    p.tournament_size = 1;
    EXPECT_THROW(p.validate(), ConfigError);
}

TEST(GaOps, CrossoverAtDimOneSwapsTheGene) {
    Rng rng(1);
    for (int i = 0; i < 20; ++i) {
        Vector a{1.0}, b{2.0};
        ga_ops::two_point_crossover(a, b, rng);
        EXPECT_EQ(a[0], 2.0);
        EXPECT_EQ(b[0], 1.0);
    }
}

TEST(GaOps, CrossoverExchangesOneContiguousSegment) {
    Rng rng(2);
    for (int i = 0; i < 200; ++i) {
        Vector a{0, 1, 2, 3, 4, 5}, b{10, 11, 12, 13, 14, 15};
        ga_ops::two_point_crossover(a, b, rng);
        std::vector<int> swapped;
        for (int d = 0; d < 6; ++d) {
            ASSERT_TRUE((a[d] == d && b[d] == 10 + d) || (a[d] == 10 + d && b[d] == d));
            swapped.push_back(a[d] != d);
        }
        // Swapped positions form one non-empty run.
        const auto first = std::find(swapped.begin(), swapped.end(), 1);
        ASSERT_NE(first, swapped.end());
        const auto last = std::find(first, swapped.end(), 0);
        ASSERT_EQ(std::find(last, swapped.end(), 1), swapped.end());
    }
}

TEST(GaOps, TournamentPicksBestOfSample) {
    const std::vector<double> fit{0.0, 5.0, 3.0, 9.0, 1.0};
    Rng rng(3), replay(3);
    for (int i = 0; i < 100; ++i) {
        std::size_t expect = replay.below(5);
        for (int k = 1; k < 3; ++k) {
            const std::size_t c = replay.below(5);
            if (fit[c] > fit[expect]) expect = c;
        }
        ASSERT_EQ(ga_ops::tournament(fit, 3, rng), expect);
    }
}

TEST(GaOps, ZeroMutationRateLeavesGenome) {
    GaParams p;
    p.mutation_rate = 0.0;
    Rng rng(4);
    Vector x{1.0, 2.0};
    ga_ops::mutate(x, p, SearchSpace{{0, 0}, {5, 5}}, rng);
    EXPECT_EQ(x, (Vector{1.0, 2.0}));
}

TEST(GaOps, SelectionOnlyNeverDegrades) {
    GaParams p;
    p.crossover_rate = 0.0;
    p.mutation_rate = 0.0;
    const auto space = SearchSpace::interval(0, 10);
    CountingObjective f(kQuadratic);
    GaState s = ga_ops::init(space, 20, 6, f);
    for (int g = 0; g < 30; ++g) {
        const std::multiset<double> before(s.fitness.begin(), s.fitness.end());
        const double best_before = *before.rbegin();
        ga_ops::step(s, p, space, f);
        for (double v : s.fitness) ASSERT_TRUE(before.count(v)) << "new fitness value appeared";
        ASSERT_EQ(*std::max_element(s.fitness.begin(), s.fitness.end()), best_before);
    }
}

TEST(GaOps, ElitismKeepsGenerationBest) {
    const GaParams p;
    const auto space = SearchSpace::interval(0, 10);
    CountingObjective f(kQuadratic);
    GaState s = ga_ops::init(space, 10, 7, f);
    double best = *std::max_element(s.fitness.begin(), s.fitness.end());
    for (int g = 0; g < 100; ++g) {
        ga_ops::step(s, p, space, f);
        const double now = *std::max_element(s.fitness.begin(), s.fitness.end());
        ASSERT_GE(now, best);
        best = now;
    }
}

// ---------------------------------------------------------------------------
// DE

TEST(DeParams, Validation) {
    EXPECT_NO_THROW(DeParams{}.validate());
    DeParams p;
    p.differential_weight = 0.0;
    EXPECT_THROW(p.validate(), ConfigError);
    p.differential_weight = 2.5;
    EXPECT_THROW(p.validate(), ConfigError);
    p = {};
    p.crossover_prob = 1.1;
    EXPECT_THROW(p.validate(), ConfigError);
}

TEST(DeOps, ZeroWeightDonorIsFirstVector) {
    const Vector r1{1.0, 2.0}, r2{5.0, -1.0}, r3{0.5, 0.25};
    EXPECT_EQ(de_ops::donor(r1, r2, r3, 0.0), r1);
    EXPECT_EQ(de_ops::donor(r1, r2, r3, 0.5), (Vector{1.0 + 0.5 * 4.5, 2.0 + 0.5 * -1.25}));
}

TEST(DeOps, PickThreeDistinctFromTarget) {
    Rng rng(8);
    for (int i = 0; i < 1000; ++i) {
        const std::size_t n = 4 + rng.below(10), target = rng.below(n);
        const auto r = de_ops::pick_three(n, target, rng);
        const std::set<std::size_t> all{r[0], r[1], r[2], target};
        ASSERT_EQ(all.size(), 4u);
        for (auto k : r) ASSERT_LT(k, n);
    }
}

TEST(DeOps, PopulationBelowFourRejected) {
    EXPECT_THROW(run(De{}, SearchSpace::interval(0, 10), {3, 5, 0}, kQuadratic), ConfigError);
}

TEST(DeOps, GreedySelectionIsMonotonePerIndividual) {
    const DeParams p;
    const SearchSpace space{{-5, -5, -5}, {5, 5, 5}};
    const Objective f0 = bowl;
    CountingObjective f(f0);
    DeState s = de_ops::init(space, 12, 9, f);
    for (int g = 0; g < 100; ++g) {
        const auto before = s.fitness;
        de_ops::step(s, p, space, f);
        for (std::size_t i = 0; i < before.size(); ++i) ASSERT_GE(s.fitness[i], before[i]);
    }
}

// ---------------------------------------------------------------------------
// CSA

TEST(CsaParams, DefaultsFollowPopulation) {
    const CsaParams p;
    EXPECT_EQ(p.selected(30), 6u);
    EXPECT_EQ(p.selected(4), 1u);
    EXPECT_EQ(p.replacements(30), 3u);
    EXPECT_EQ(p.replacements(5), 1u);
    CsaParams q;
    q.select_n = 40;
    EXPECT_THROW(q.selected(30), ConfigError);
    q = {};
    q.clone_factor = 0.0;
    EXPECT_THROW(q.validate(), ConfigError);
}

TEST(CsaOps, BestRankHasSmallestMutationScale) {
    for (std::size_t sel : {2u, 5u, 18u}) {
        double prev = 0.0;
        for (std::size_t rank = 1; rank <= sel; ++rank) {
            const double s = csa_ops::mutation_scale(rank, sel, 0.1);
            ASSERT_GT(s, prev);
            prev = s;
        }
        EXPECT_DOUBLE_EQ(csa_ops::mutation_scale(1, sel, 0.1), 0.1 * std::exp(-1.0));
        EXPECT_DOUBLE_EQ(csa_ops::mutation_scale(sel, sel, 0.1), 0.1);
    }
}

TEST(CsaOps, CloneCountDecreasesWithRank) {
    EXPECT_EQ(csa_ops::clone_count(1, 30, 0.1), 3u);
    EXPECT_EQ(csa_ops::clone_count(2, 30, 0.1), 2u);  // round(1.5)
    EXPECT_EQ(csa_ops::clone_count(6, 30, 0.1), 1u);  // at least one
    EXPECT_EQ(csa_ops::clone_count(1, 90, 0.1), 9u);
}

TEST(CsaOps, RankOrderBreaksTiesByIndex) {
    EXPECT_EQ(csa_ops::rank_order({1.0, 3.0, 3.0, 0.0}), (std::vector<std::size_t>{1, 2, 0, 3}));
}

TEST(CsaOps, ReselectionKeepsFamilyBest) {
    // With no random replacements possible (select everything), every
    // antibody's fitness can only improve.
    CsaParams p;
    p.select_n = 10;
    const auto space = SearchSpace::interval(0, 10);
    CountingObjective f(kQuadratic);
    CsaState s = csa_ops::init(space, 10, 10, f);
    for (int g = 0; g < 50; ++g) {
        const auto before = s.fitness;
        csa_ops::step(s, p, space, f);
        for (std::size_t i = 0; i < before.size(); ++i) ASSERT_GE(s.fitness[i], before[i]);
    }
}

TEST(CsaOps, GenerationBestNeverRegresses) {
    const CsaParams p;
    const auto space = SearchSpace::interval(0, 10);
    CountingObjective f(kQuadratic);
    CsaState s = csa_ops::init(space, 20, 11, f);
    double best = *std::max_element(s.fitness.begin(), s.fitness.end());
    for (int g = 0; g < 100; ++g) {
        csa_ops::step(s, p, space, f);
        const double now = *std::max_element(s.fitness.begin(), s.fitness.end());
        ASSERT_GE(now, best);
        best = now;
    }
}

// ---------------------------------------------------------------------------
// PSO

TEST(PsoParams, Validation) {
    EXPECT_NO_THROW(PsoParams{}.validate());
    PsoParams p;
    p.v_max = 0.0;
    EXPECT_THROW(p.validate(), ConfigError);
    p = {};
    p.inertia = -1.0;
    EXPECT_THROW(p.validate(), ConfigError);
}

TEST(PsoOps, VelocityHandValues) {
    // At pbest == gbest with zero velocity the particle is stationary.
    EXPECT_EQ(pso_ops::velocity(0.0, 2.0, 2.0, 2.0, 0.729, 1.49445, 1.49445, 0.3, 0.8), 0.0);
    // w = 0, c1 = 0, c2 = 1, u2 = 1: x + v lands on gbest.
    const double x = 1.25, g = 7.5;
    EXPECT_EQ(x + pso_ops::velocity(3.0, x, 4.0, g, 0.0, 0.0, 1.0, 0.9, 1.0), g);
    EXPECT_DOUBLE_EQ(pso_ops::velocity(1.0, 0.0, 2.0, 4.0, 0.5, 1.0, 2.0, 0.5, 0.25), 0.5 + 1.0 + 2.0);
}

TEST(PsoOps, VelocityIsClampedToVmax) {
    PsoParams p;
    p.v_max = 0.05;
    const auto space = SearchSpace::interval(0, 10);
    CountingObjective f(kQuadratic);
    PsoState s = pso_ops::init(space, 10, 12, f);
    for (int g = 0; g < 50; ++g) {
        const auto before = s.position;
        pso_ops::step(s, p, space, f);
        for (std::size_t i = 0; i < before.size(); ++i) {
            ASSERT_LE(std::fabs(s.velocity[i][0]), 0.5 + 1e-12);
            ASSERT_LE(std::fabs(s.position[i][0] - before[i][0]), 0.5 + 1e-12);
        }
    }
}

TEST(PsoOps, PersonalAndGlobalBestsMonotone) {
    const PsoParams p;
    const SearchSpace space{{-5, -5, -5}, {5, 5, 5}};
    const Objective f0 = bowl;
    CountingObjective f(f0);
    PsoState s = pso_ops::init(space, 15, 13, f);
    for (int g = 0; g < 100; ++g) {
        const auto pb = s.personal_best_fitness;
        const double gb = s.global_best_fitness;
        pso_ops::step(s, p, space, f);
        for (std::size_t i = 0; i < pb.size(); ++i) ASSERT_GE(s.personal_best_fitness[i], pb[i]);
        ASSERT_GE(s.global_best_fitness, gb);
        ASSERT_EQ(s.global_best_fitness, *std::max_element(s.personal_best_fitness.begin(), s.personal_best_fitness.end()));
    }
}

// ---------------------------------------------------------------------------
// Quadratic oracle for the four baselines

class BaselineOracle : public ::testing::TestWithParam<std::string> {};

TEST_P(BaselineOracle, FindsQuadraticOptimum) {
    const AnyOptimizer opt = AnyOptimizer::by_name(GetParam());
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto r = run(opt, SearchSpace::interval(0, 10), {30, 1000, seed}, kQuadratic);
        hits += std::fabs(r.best_position[0] - 3.0) < 1e-2;
        for (std::size_t i = 1; i < r.history.size(); ++i)
            ASSERT_GE(r.history[i].best_fitness, r.history[i - 1].best_fitness);
    }
    EXPECT_GE(hits, 40);
}

TEST_P(BaselineOracle, SolvesThreeDimensionalBowl) {
    const AnyOptimizer opt = AnyOptimizer::by_name(GetParam());
    const auto r = run(opt, SearchSpace{{-5, -5, -5}, {5, 5, 5}}, {30, 300, 1}, bowl);
    EXPECT_GT(r.best_fitness, -1e-2);
}

INSTANTIATE_TEST_SUITE_P(Baselines, BaselineOracle, ::testing::Values("ga", "de", "csa", "pso"));

TEST(Baselines, NoSharedRandomState) {
    // Interleaving other algorithms between two identical runs must not
    // change the result: each run owns its generator.
    const auto space = SearchSpace::interval(0, 10);
    const auto first = run(Pso{}, space, {10, 50, 5}, kQuadratic);
    run(Ga{}, space, {10, 50, 5}, kQuadratic);
    run(Csa{}, space, {10, 50, 6}, kQuadratic);
    run(Codoa{}, space, {10, 50, 7}, kQuadratic);
    EXPECT_EQ(run(Pso{}, space, {10, 50, 5}, kQuadratic), first);
}
