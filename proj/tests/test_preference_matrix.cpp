#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <gtest/gtest.h>

#include "rmed/preference_matrix.hpp"
#include "rmed/rng.hpp"

using namespace rmed;

// Arms below are 0-based; comments give the 1-based names used in reports.

namespace {

// Frozen from tests/oracles/bound_oracle.py.
constexpr double kExample1TrueLb = 2.4306393217359402845;
constexpr double kExample1Term = 1.2153196608679701423;
constexpr double kExample1q085TrueLb = 1.9548604480527131166;
constexpr double kSixRankersLb = 20.734981786103968299;
constexpr double kCyclicTrueLb = 0.81507518024609825853;
constexpr double kCyclicLb1 = 7.4495244247131814837;
constexpr double kArithmeticLb = 12.712159046197129442;
constexpr double kExample1Switch = 0.7786737581;

bool contains(const std::vector<Arm>& v, Arm a) { return std::find(v.begin(), v.end(), a) != v.end(); }

// Random valid matrix with arm `w` as Condorcet winner.
PreferenceMatrix random_with_winner(Xoshiro256& rng, std::size_t k, Arm w) {
    std::vector<std::vector<double>> mu(k, std::vector<double>(k, 0.5));
    for (Arm i = 0; i < k; ++i) {
        for (Arm j = i + 1; j < k; ++j) {
            double p = 0.05 + 0.9 * rng.uniform();
            if (i == w) p = 0.51 + 0.44 * rng.uniform();
            if (j == w) p = 0.05 + 0.44 * rng.uniform();
            mu[i][j] = p;
            mu[j][i] = 1.0 - p;
        }
    }
    return PreferenceMatrix::create(mu);
}

}  // namespace

TEST(Validate, Builders) {
    EXPECT_TRUE(validate(six_rankers()).empty());
    EXPECT_TRUE(validate(cyclic()).empty());
    EXPECT_TRUE(validate(arithmetic()).empty());
    EXPECT_TRUE(validate(example1(0.7)).empty());
}

TEST(Validate, RowSumViolation) {
    auto m = PreferenceMatrix::unchecked({{0.5, 0.7}, {0.4, 0.5}});
    auto v = validate(m);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].kind, Violation::Kind::row_sum);
    EXPECT_EQ(v[0].i, 0u);
    EXPECT_EQ(v[0].j, 1u);
    EXPECT_THROW(PreferenceMatrix::create({{0.5, 0.7}, {0.4, 0.5}}), ValidationError);
}

TEST(Validate, DiagonalViolation) {
    auto m = PreferenceMatrix::unchecked({{0.6, 0.7}, {0.3, 0.5}});
    auto v = validate(m);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].kind, Violation::Kind::diagonal);
}

TEST(Validate, NonSquareIsStructural) {
    EXPECT_THROW(PreferenceMatrix::unchecked({{0.5, 0.5}, {0.5}}), std::invalid_argument);
}

TEST(CondorcetWinner, Datasets) {
    EXPECT_EQ(condorcet_winner(six_rankers()), Arm{0});
    EXPECT_EQ(condorcet_winner(cyclic()), Arm{0});
    EXPECT_EQ(condorcet_winner(example1(0.7)), Arm{0});
    EXPECT_EQ(condorcet_winner(arithmetic(8)), Arm{0});
    auto cycle = PreferenceMatrix::create({{0.5, 0.6, 0.4}, {0.4, 0.5, 0.6}, {0.6, 0.4, 0.5}});
    EXPECT_FALSE(condorcet_winner(cycle).has_value());
}

TEST(Superiors, Examples) {
    EXPECT_EQ(superiors(cyclic(), 1), (std::vector<Arm>{0, 3}));  // arm 2 -> {1, 4}
    EXPECT_TRUE(superiors(six_rankers(), 0).empty());
    EXPECT_EQ(superiors(example1(0.7), 2), (std::vector<Arm>{0, 1}));  // arm 3 -> {1, 2}
    // exactly 1/2 is nobody's superior
    EXPECT_FALSE(contains(superiors(six_rankers(), 3), 5));
    EXPECT_FALSE(contains(superiors(six_rankers(), 5), 3));
}

TEST(BestOpponent, Cyclic) {
    const auto m = cyclic();
    EXPECT_EQ(best_opponent(m, 1), 3u);  // 2 -> 4
    EXPECT_EQ(best_opponent(m, 2), 1u);  // 3 -> 2
    EXPECT_EQ(best_opponent(m, 3), 2u);  // 4 -> 3
    EXPECT_THROW(best_opponent(m, 0), std::domain_error);
}

TEST(BestOpponent, Example1Threshold) {
    EXPECT_EQ(best_opponent(example1(0.7), 2), 0u);
    EXPECT_EQ(best_opponent(example1(0.85), 2), 1u);
    EXPECT_EQ(best_opponent(example1(kExample1Switch - 1e-6), 2), 0u);
    EXPECT_EQ(best_opponent(example1(kExample1Switch + 1e-6), 2), 1u);
}

TEST(BestOpponent, NoWinnerIsDomainError) {
    auto cycle = PreferenceMatrix::create({{0.5, 0.6, 0.4}, {0.4, 0.5, 0.6}, {0.6, 0.4, 0.5}});
    EXPECT_THROW(best_opponent(cycle, 1), std::domain_error);
    EXPECT_THROW(true_lb_coefficient(cycle), std::domain_error);
    EXPECT_THROW(rmed1_lb_coefficient(cycle), std::domain_error);
}

TEST(Bounds, Example1) {
    const auto r = true_lb_coefficient(example1(0.7));
    EXPECT_NEAR(r.true_lb, kExample1TrueLb, 1e-9 * kExample1TrueLb);
    EXPECT_NEAR(r.term[1], kExample1Term, 1e-12);
    EXPECT_NEAR(r.term[2], kExample1Term, 1e-12);
    EXPECT_EQ(r.best_opponent[1], 0u);
    EXPECT_EQ(r.best_opponent[2], 0u);
    EXPECT_NEAR(true_lb_coefficient(example1(0.85)).true_lb, kExample1q085TrueLb, 1e-9);
}

TEST(Bounds, SixRankersLb1EqualsTrueLb) {
    const auto r = true_lb_coefficient(six_rankers());
    EXPECT_NEAR(r.true_lb, kSixRankersLb, 1e-9 * kSixRankersLb);
    EXPECT_DOUBLE_EQ(rmed1_lb_coefficient(six_rankers()), r.true_lb);
    for (Arm i = 1; i < 6; ++i) EXPECT_EQ(r.best_opponent[i], 0u);
}

TEST(Bounds, CyclicLb1Exceeds) {
    const auto r = true_lb_coefficient(cyclic());
    EXPECT_NEAR(r.true_lb, kCyclicTrueLb, 1e-9 * kCyclicTrueLb);
    EXPECT_NEAR(r.lb1, kCyclicLb1, 1e-9 * kCyclicLb1);
    EXPECT_GT(rmed1_lb_coefficient(cyclic()), r.true_lb);
}

TEST(Bounds, Arithmetic) {
    EXPECT_NEAR(true_lb_coefficient(arithmetic(8)).true_lb, kArithmeticLb, 1e-9 * kArithmeticLb);
}

TEST(Bounds, NearDegenerateArmIsFinite) {
    const double eps = 1e-6;
    auto m = PreferenceMatrix::create({{0.5, 1.0 - eps}, {eps, 0.5}});
    const auto r = true_lb_coefficient(m);
    EXPECT_TRUE(std::isfinite(r.true_lb));
    EXPECT_GT(r.true_lb, 0.0);
    EXPECT_DOUBLE_EQ(r.true_lb, r.lb1);  // K = 2
}

TEST(Builders, TableEntries) {
    EXPECT_EQ(six_rankers()(0, 4), 0.61);
    EXPECT_EQ(cyclic()(1, 2), 0.9);
    EXPECT_EQ(example1(0.5)(1, 2), 0.5);
    EXPECT_NEAR(arithmetic(8)(0, 7), 0.85, 1e-15);
    EXPECT_THROW(example1(0.0), std::domain_error);
    EXPECT_THROW(example1(1.0), std::domain_error);
    EXPECT_THROW(arithmetic(12), std::domain_error);
    EXPECT_THROW(arithmetic(1), std::domain_error);
}

TEST(Csv, RoundTrip) {
    for (const auto& m : {six_rankers(), cyclic(), arithmetic(8), example1(0.7)}) {
        EXPECT_EQ(from_csv(to_csv(m)), m);
    }
}

TEST(Csv, ValidationErrorNamesPair) {
    try {
        from_csv("0.5,0.7\n0.4,0.5\n");
        FAIL();
    } catch (const CsvError& e) {
        EXPECT_EQ(e.kind(), CsvError::Kind::validation);
        ASSERT_EQ(e.violations().size(), 1u);
        EXPECT_EQ(e.violations()[0].i, 0u);
        EXPECT_EQ(e.violations()[0].j, 1u);
        EXPECT_NE(std::string(e.what()).find("mu(1,2)"), std::string::npos);
    }
}

TEST(Csv, DistinctErrors) {
    auto kind_of = [](const std::string& text) {
        try {
            from_csv(text);
        } catch (const CsvError& e) {
            return e.kind();
        }
        ADD_FAILURE() << "no error for: " << text;
        return CsvError::Kind::parse;
    };
    EXPECT_EQ(kind_of("0.5\n"), CsvError::Kind::too_small);
    EXPECT_EQ(kind_of(""), CsvError::Kind::too_small);
    EXPECT_EQ(kind_of("0.5,abc\n0.5,0.5\n"), CsvError::Kind::parse);
    EXPECT_EQ(kind_of("0.5,0,5\n0.5,0.5\n"), CsvError::Kind::ragged);
    EXPECT_EQ(kind_of("0.5,0.5,0.5\n0.5,0.5,0.5\n"), CsvError::Kind::ragged);
    EXPECT_EQ(kind_of("0.5,0.5,\n0.5,0.5\n"), CsvError::Kind::parse);
    try {
        from_csv("0.5,0.6\n0.4,x\n");
    } catch (const CsvError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(Csv, ToleratesWhitespaceAndCrlf) {
    auto m = from_csv(" 0.5 , 0.6\r\n0.4,0.5\r\n\n");
    EXPECT_EQ(m.size(), 2u);
    EXPECT_EQ(m(0, 1), 0.6);
}

TEST(PreferenceProperty, WinnerIsSuperiorOfEveryArm) {
    Xoshiro256 rng(99);
    for (int n = 0; n < 300; ++n) {
        const std::size_t k = 2 + rng.below(9);
        const Arm w = rng.below(k);
        const auto m = random_with_winner(rng, k, w);
        ASSERT_EQ(condorcet_winner(m), w);
        const auto r = true_lb_coefficient(m);
        ASSERT_LE(r.true_lb, r.lb1 * (1 + 1e-12));
        double total = 0.0;
        for (Arm i = 0; i < k; ++i) {
            total += r.term[i];
            if (i == w) continue;
            ASSERT_TRUE(contains(superiors(m, i), w));
            ASSERT_TRUE(contains(superiors(m, i), best_opponent(m, i)));
            ASSERT_GE(r.term[i], 0.0);
        }
        ASSERT_NEAR(total, r.true_lb, 1e-12 * r.true_lb);
    }
}
