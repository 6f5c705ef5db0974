#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "svmcodoa/svmcodoa.hpp"
#include "test_util.hpp"

using namespace svmcodoa;

// ---------------------------------------------------------------------------
// accuracy

TEST(Accuracy, TableFiveRows) {
    EXPECT_EQ(format_accuracy({939, 33}), "96.60");
    EXPECT_EQ(format_accuracy({49, 6}), "89.09");  // half-up from 89.0909
    EXPECT_EQ(format_accuracy({91, 14}), "86.67");
    EXPECT_EQ(format_accuracy({0, 10}), "0.00");
    EXPECT_EQ(format_accuracy({10, 0}), "100.00");
}

TEST(Accuracy, RawValue) {
    EXPECT_DOUBLE_EQ(accuracy(939, 33), 100.0 * 939.0 / 972.0);
    EXPECT_DOUBLE_EQ(accuracy(49, 6), 4900.0 / 55.0);
    EXPECT_EQ(accuracy(0, 10), 0.0);
}

TEST(Accuracy, EmptyEvaluationThrows) {
    EXPECT_THROW(accuracy(0, 0), EmptyEvaluationError);
    EXPECT_THROW(format_accuracy({0, 0}), EmptyEvaluationError);
}

TEST(Accuracy, HundredthsMatchIntegerOracle) {
    // Oracle: quotient and remainder of 10000 * TD / total, rounded half up.
    Rng rng(1);
    for (int i = 0; i < 20000; ++i) {
        const std::uint64_t td = rng.below(5000), fd = rng.below(5000) + (td == 0);
        const std::uint64_t total = td + fd;
        std::uint64_t q = 10000 * td / total;
        const std::uint64_t rem = 10000 * td % total;
        if (2 * rem >= total) ++q;
        ASSERT_EQ(accuracy_hundredths({td, fd}), q) << td << "/" << fd;
    }
}

TEST(Accuracy, ComplementIdentity) {
    Rng rng(2);
    const double ulp = std::nextafter(100.0, 200.0) - 100.0;
    for (int i = 0; i < 20000; ++i) {
        const std::uint64_t td = rng.below(1000000) + 1, fd = rng.below(1000000) + 1;
        ASSERT_LE(std::fabs(accuracy(td, fd) + accuracy(fd, td) - 100.0), ulp) << td << "," << fd;
    }
}

TEST(Accuracy, RoundTwoHalfUp) {
    EXPECT_EQ(round2(89.085), 89.09);
    EXPECT_EQ(round2(1.005), 1.01);
    EXPECT_EQ(round2(96.6049), 96.60);
    EXPECT_EQ(format2(100.0), "100.00");
    EXPECT_EQ(format2(0.0), "0.00");
}

TEST(DiagnosisCounts, Accumulate) {
    DiagnosisCounts c{3, 1};
    c += DiagnosisCounts{2, 4};
    EXPECT_EQ(c, (DiagnosisCounts{5, 5}));
    EXPECT_EQ(c.total(), 10u);
}

// ---------------------------------------------------------------------------
// SearchSpace / RunConfig

TEST(SearchSpace, Validation) {
    EXPECT_NO_THROW(SearchSpace::interval(0.01, 50.0));
    EXPECT_THROW(SearchSpace::interval(1.0, 1.0), ConfigError);
    EXPECT_THROW(SearchSpace::interval(2.0, 1.0), ConfigError);
    EXPECT_THROW((SearchSpace{{0.0, 0.0}, {1.0}}).validate(), ConfigError);
    EXPECT_THROW((SearchSpace{{}, {}}).validate(), ConfigError);
}

TEST(SearchSpace, Clamp) {
    const auto s = SearchSpace::interval(0.0, 10.0);
    EXPECT_EQ(s.clamp(0, -1.0), 0.0);
    EXPECT_EQ(s.clamp(0, 11.0), 10.0);
    EXPECT_EQ(s.clamp(0, 4.0), 4.0);
    EXPECT_EQ(s.dim(), 1u);
    EXPECT_EQ(s.range(0), 10.0);
}

TEST(RunConfig, Validation) {
    EXPECT_NO_THROW((RunConfig{2, 1, 0}).validate());
    EXPECT_THROW((RunConfig{1, 10, 0}).validate(), ConfigError);
    EXPECT_THROW((RunConfig{10, 0, 0}).validate(), ConfigError);
}

TEST(BestTracker, OnlyStrictImprovementReplaces) {
    BestTracker t;
    const double a[1] = {1.0}, b[1] = {2.0};
    EXPECT_TRUE(t.offer(a, 5.0));
    EXPECT_FALSE(t.offer(b, 5.0));
    EXPECT_EQ(t.position()[0], 1.0);
    EXPECT_TRUE(t.offer(b, 6.0));
    EXPECT_EQ(t.position()[0], 2.0);
}

TEST(CountingObjective, MapsNanToMinusInfinity) {
    const Objective f = [](std::span<const double>) { return std::nan(""); };
    CountingObjective c(f);
    const double x[1] = {0.0};
    EXPECT_EQ(c(x), -std::numeric_limits<double>::infinity());
    EXPECT_EQ(c.count(), 1u);
}

// ---------------------------------------------------------------------------
// run() contracts, for every optimizer

class RunContract : public ::testing::TestWithParam<std::string> {
protected:
    AnyOptimizer opt() const { return AnyOptimizer::by_name(GetParam()); }
};

TEST_P(RunContract, SingleIterationHasOneHistoryEntry) {
    const auto r = run(opt(), SearchSpace::interval(0, 10), {10, 1, 3}, testutil::quadratic);
    ASSERT_EQ(r.history.size(), 1u);
    EXPECT_EQ(r.history[0].iteration, 1u);
    EXPECT_EQ(r.history[0].best_fitness, r.best_fitness);
}

TEST_P(RunContract, ConstantObjectiveGivesFlatHistory) {
    const Objective seven = [](std::span<const double>) { return 7.0; };
    const auto r = run(opt(), SearchSpace::interval(0, 10), {10, 50, 3}, seven);
    EXPECT_EQ(r.best_fitness, 7.0);
    for (const auto& h : r.history) EXPECT_EQ(h.best_fitness, 7.0);
}

TEST_P(RunContract, DeterministicUnderFixedSeed) {
    const auto space = SearchSpace::interval(0, 10);
    const auto a = run(opt(), space, {12, 60, 99}, testutil::quadratic);
    const auto b = run(opt(), space, {12, 60, 99}, testutil::quadratic);
    EXPECT_EQ(a, b);
    const auto c = run(opt(), space, {12, 60, 100}, testutil::quadratic);
    EXPECT_NE(a.best_position, c.best_position);
}

TEST_P(RunContract, HistoryMonotoneAndLastEqualsBest) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto r = run(opt(), SearchSpace::interval(0, 10), {10, 80, seed}, testutil::quadratic);
        for (std::size_t i = 1; i < r.history.size(); ++i) {
            ASSERT_GE(r.history[i].best_fitness, r.history[i - 1].best_fitness);
            ASSERT_EQ(r.history[i].iteration, i + 1);
        }
        ASSERT_EQ(r.history.back().best_fitness, r.best_fitness);
    }
}

TEST_P(RunContract, EveryEvaluatedPositionIsInsideBounds) {
    const SearchSpace space{{-1.0, 2.0}, {1.0, 2.5}};
    std::size_t calls = 0;
    bool outside = false;
    const Objective f = [&](std::span<const double> x) {
        ++calls;
        if (x.size() != 2 || !space.contains(x)) outside = true;
        // Optimum outside the box, so the search presses against the bounds.
        return -(x[0] - 5.0) * (x[0] - 5.0) - (x[1] + 3.0) * (x[1] + 3.0);
    };
    const auto r = run(opt(), space, {10, 100, 5}, f);
    EXPECT_FALSE(outside);
    EXPECT_EQ(r.evaluations, calls);
    EXPECT_TRUE(space.contains(r.best_position));
    EXPECT_NEAR(r.best_position[0], 1.0, 1e-2);
    EXPECT_NEAR(r.best_position[1], 2.0, 1e-2);
}

TEST_P(RunContract, NanObjectiveNeverBecomesBest) {
    const Objective f = [](std::span<const double> x) { return x[0] > 5.0 ? std::nan("") : x[0]; };
    const auto r = run(opt(), SearchSpace::interval(0, 10), {10, 30, 1}, f);
    EXPECT_LE(r.best_position[0], 5.0);
    EXPECT_FALSE(std::isnan(r.best_fitness));
}

INSTANTIATE_TEST_SUITE_P(AllOptimizers, RunContract, ::testing::Values("codoa", "ga", "de", "csa", "pso"));

TEST(AnyOptimizer, ByName) {
    for (auto name : AnyOptimizer::names()) EXPECT_EQ(AnyOptimizer::by_name(name).name(), name);
    EXPECT_THROW(AnyOptimizer::by_name("sa"), ConfigError);
}

TEST(Run, RejectsInvalidInputs) {
    const Codoa c;
    EXPECT_THROW(run(c, SearchSpace::interval(0, 10), {1, 10, 0}, testutil::quadratic), ConfigError);
    EXPECT_THROW(run(c, SearchSpace{{1.0}, {0.0}}, {10, 10, 0}, testutil::quadratic), ConfigError);
}
