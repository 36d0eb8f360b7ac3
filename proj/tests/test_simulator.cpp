#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include "rmed/simulator.hpp"

using namespace rmed;

namespace {

RunSpec spec_for(const PreferenceMatrix& m, PolicyConfig p, std::uint64_t T, std::uint64_t seed) {
    return RunSpec{m, std::move(p), T, seed, {}};
}

RmedConfig rmed2(double alpha) {
    RmedConfig c;
    c.variant = Variant::rmed2;
    c.alpha = alpha;
    return c;
}

}  // namespace

TEST(Duel, SelfDuelReturnsArmAndConsumesUniform) {
    const auto m = six_rankers();
    Xoshiro256 a(1), b(1);
    EXPECT_EQ(duel(m, 2, 2, a), 2u);
    b.uniform();
    EXPECT_EQ(a(), b());
}

TEST(Duel, FrequencyWithinThreeSigma) {
    const auto m = six_rankers();
    Xoshiro256 rng(42);
    const int n = 100000;
    int wins = 0;
    for (int s = 0; s < n; ++s) wins += duel(m, 0, 5, rng) == 0;
    const double p = m(0, 5);
    EXPECT_NEAR(wins / double(n), p, 3.0 * std::sqrt(p * (1 - p) / n));
}

TEST(RegretIncrement, Values) {
    const auto m = six_rankers();
    EXPECT_NEAR(regret_increment(m, 4, 5), 0.11, 1e-12);
    EXPECT_NEAR(regret_increment(m, 0, 1), 0.025, 1e-12);
    EXPECT_EQ(regret_increment(m, 0, 0), 0.0);
    EXPECT_THROW(regret_increment(PreferenceMatrix::create({{0.5, 0.6, 0.4}, {0.4, 0.5, 0.6}, {0.6, 0.4, 0.5}}), 0, 1), std::domain_error);
}

TEST(CheckpointGrid, Shape) {
    const auto g = checkpoint_grid(100);
    EXPECT_EQ(g.front(), 1u);
    EXPECT_EQ(g.back(), 100u);
    EXPECT_TRUE(std::is_sorted(g.begin(), g.end()));
    EXPECT_EQ(std::adjacent_find(g.begin(), g.end()), g.end());
    EXPECT_EQ(g, (std::vector<std::uint64_t>{1, 2, 3, 4, 5, 6, 7, 8, 10, 11, 12, 14, 15, 17, 19, 22, 25, 28, 31,
                                             35, 39, 44, 50, 56, 63, 70, 79, 89, 100}));
    EXPECT_EQ(checkpoint_grid(1), (std::vector<std::uint64_t>{1}));
    EXPECT_EQ(checkpoint_grid(1000000).size(), 109u);
}

TEST(Run, InitialPhaseRegretIsExact) {
    // Horizon = one lexicographic pass: every pair exactly once.
    const auto m = six_rankers();
    const auto tr = run(spec_for(m, RmedConfig{}, 15, 3));
    double expected = 0.0;
    for (Arm i = 0; i < 6; ++i) {
        for (Arm j = i + 1; j < 6; ++j) expected += regret_increment(m, i, j);
    }
    EXPECT_NEAR(tr.final_regret, expected, 1e-12);
    EXPECT_EQ(tr.self_duels, 0u);
}

TEST(Run, RejectsBadSpecs) {
    const auto m = six_rankers();
    EXPECT_THROW(run(spec_for(m, RmedConfig{}, 10, 0)), std::invalid_argument);  // shorter than init
    EXPECT_THROW(run(spec_for(m, RmedConfig{}, 0, 0)), std::invalid_argument);
    auto nowin = PreferenceMatrix::create({{0.5, 0.6, 0.4}, {0.4, 0.5, 0.6}, {0.6, 0.4, 0.5}});
    EXPECT_THROW(run(spec_for(nowin, RmedConfig{}, 100, 0)), std::invalid_argument);
    RunSpec bad_cp = spec_for(m, RmedConfig{}, 100, 0);
    bad_cp.checkpoints = {5, 5};
    EXPECT_FALSE(problems(bad_cp).empty());
}

TEST(Run, CustomCheckpoints) {
    RunSpec s = spec_for(cyclic(), RmedConfig{}, 500, 1);
    s.checkpoints = {50, 200, 500};
    const auto tr = run(s);
    ASSERT_EQ(tr.checkpoints.size(), 3u);
    EXPECT_EQ(tr.checkpoints[1].t, 200u);
    EXPECT_EQ(tr.checkpoints.back().regret, tr.final_regret);
}

TEST(RunProperty, DeterminismConservationMonotonicity) {
    const std::vector<PreferenceMatrix> ms{six_rankers(), cyclic(), arithmetic(8), example1(0.7)};
    const std::vector<PolicyConfig> ps{RmedConfig{}, rmed2(3.0), RucbConfig{}};
    for (const auto& m : ms) {
        for (const auto& p : ps) {
            for (std::uint64_t seed = 0; seed < 3; ++seed) {
                const auto s = spec_for(m, p, 4000, seed);
                const auto a = run(s);
                EXPECT_EQ(a, run(s));
                EXPECT_EQ(total_duels(a), 4000u);
                EXPECT_NEAR(recomputed_regret(a, m), a.final_regret, 1e-9 * std::max(1.0, a.final_regret));
                double prev = 0.0;
                for (const auto& c : a.checkpoints) {
                    EXPECT_GE(c.regret, prev);
                    EXPECT_LE(c.regret, static_cast<double>(c.t));
                    prev = c.regret;
                }
                EXPECT_EQ(a.checkpoints.back().t, 4000u);
            }
        }
    }
}

TEST(RunProperty, ObserverSeesEveryRound) {
    const auto m = six_rankers();
    std::uint64_t rounds = 0, last = 0;
    double regret = 0.0;
    const auto tr = run(spec_for(m, RucbConfig{}, 3000, 4), [&](std::uint64_t t, ArmPair p, Arm w) {
        ++rounds;
        EXPECT_EQ(t, last + 1);
        last = t;
        EXPECT_TRUE(w == p.first || w == p.second);
        regret += regret_increment(m, p.first, p.second);
    });
    EXPECT_EQ(rounds, 3000u);
    EXPECT_NEAR(regret, tr.final_regret, 1e-9);
}

TEST(Aggregate, MeanAndUnbiasedSd) {
    RegretTrace a, b, c;
    a.checkpoints = {{1, 1.0}, {2, 2.0}};
    b.checkpoints = {{1, 3.0}, {2, 2.0}};
    c.checkpoints = {{1, 5.0}, {2, 2.0}};
    const auto s = aggregate({a, b, c});
    EXPECT_EQ(s.runs, 3u);
    EXPECT_DOUBLE_EQ(s.mean[0], 3.0);
    EXPECT_DOUBLE_EQ(s.sd[0], 2.0);
    EXPECT_DOUBLE_EQ(s.sd[1], 0.0);
    EXPECT_DOUBLE_EQ(aggregate({a}).sd[0], 0.0);
    EXPECT_THROW(aggregate({}), std::invalid_argument);
    RegretTrace d;
    d.checkpoints = {{1, 1.0}, {3, 2.0}};
    EXPECT_THROW(aggregate({a, d}), std::invalid_argument);
}

TEST(RunAll, KeepsInputOrderAcrossThreadCounts) {
    std::vector<RunSpec> specs;
    for (std::uint64_t r = 0; r < 12; ++r) {
        specs.push_back(spec_for(cyclic(), r % 2 ? PolicyConfig{RucbConfig{}} : PolicyConfig{RmedConfig{}}, 2000,
                                 derive_seed(9, r)));
    }
    const auto one = run_all(specs, 1);
    const auto many = run_all(specs, 8);
    ASSERT_EQ(one.size(), specs.size());
    EXPECT_EQ(one, many);
    for (std::size_t r = 0; r < specs.size(); ++r) EXPECT_EQ(one[r], run(specs[r]));
}

TEST(RunAll, PropagatesFailure) {
    std::vector<RunSpec> specs{spec_for(cyclic(), RmedConfig{}, 100, 0), spec_for(cyclic(), RmedConfig{}, 1, 0)};
    EXPECT_THROW(run_all(specs, 2), std::invalid_argument);
}
