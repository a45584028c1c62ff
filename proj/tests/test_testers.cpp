#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "closeness/distribution.hpp"
#include "closeness/numeric.hpp"
#include "closeness/sampling.hpp"
#include "closeness/testers.hpp"
#include "oracles.hpp"

using namespace closeness;

namespace {

CountHistogram hist(std::vector<std::uint64_t> counts, std::uint64_t m = 0) {
    return CountHistogram(std::move(counts), SamplingMode::Poissonized, m);
}

}  // namespace

TEST(L1Statistic, HandComputedValues) {
    EXPECT_EQ(l1_statistic(hist({4, 0}), hist({0, 4})), 6.0);
    EXPECT_EQ(l1_statistic(hist({3, 2}), hist({3, 2})), -2.0);
    EXPECT_EQ(l1_statistic(hist({0, 0, 0}), hist({0, 0, 0})), 0.0);
    const auto terms = l1_statistic_terms(hist({4, 0, 1}), hist({0, 4, 1}));
    ASSERT_EQ(terms.size(), 3u);
    EXPECT_EQ(terms[0], 3.0);
    EXPECT_EQ(terms[2], -1.0);
    EXPECT_THROW(l1_statistic(hist({1}), hist({1, 2})), std::invalid_argument);
}

TEST(L1Test, DecisionRule) {
    const auto x = hist({3, 2}, 5), y = hist({3, 2}, 5);
    const TestVerdict v = l1_test(x, y, 0.1);
    EXPECT_EQ(v.decision, Decision::Equal);
    EXPECT_DOUBLE_EQ(v.threshold, 0.1 * std::sqrt(5.0));
    const TestVerdict w = l1_test(hist({4, 0}, 4), hist({0, 4}, 4), 1.0, true);
    EXPECT_EQ(w.decision, Decision::Different);  // 6 > 2
    EXPECT_EQ(w.terms.size(), 2u);
    EXPECT_THROW(l1_test(x, y, 0.0), std::invalid_argument);
    EXPECT_THROW(l1_test(x, hist({3, 2}, 6), 1.0), std::invalid_argument);
}

TEST(Deviation, CenterFunction) {
    EXPECT_DOUBLE_EQ(deviation_center(0), 0.0);
    EXPECT_DOUBLE_EQ(deviation_center(1), 0.5);
    EXPECT_DOUBLE_EQ(deviation_center(2), 0.5);
    EXPECT_DOUBLE_EQ(deviation_center(3), 0.75);
    for (std::uint64_t j : {4ull, 5ull, 17ull, 50ull, 51ull, 200ull, 1001ull, 5000ull}) {
        const double ref = static_cast<double>(oracle::half_binomial_abs_deviation(j));
        EXPECT_NEAR(deviation_center(j), ref, 1e-9 * ref) << j;
    }
}

TEST(Deviation, Statistic) {
    EXPECT_EQ(l1_deviation_statistic(hist({0, 0}), hist({0, 0})), 0.0);
    // X = Y gives sum of -f(2 X_i) <= 0.
    const double tied = l1_deviation_statistic(hist({1, 2, 0}), hist({1, 2, 0}));
    EXPECT_DOUBLE_EQ(tied, -(deviation_center(2) + deviation_center(4)));
    // |4 - 0| - f(4) per coordinate.
    EXPECT_DOUBLE_EQ(l1_deviation_statistic(hist({4}), hist({0})), 4 - deviation_center(4));
}

TEST(L2Statistic, HandComputedValues) {
    EXPECT_EQ(l2_statistic(hist({2, 0}), hist({1, 1})), -2.0);
    EXPECT_EQ(l2_statistic(hist({1, 1}), hist({1, 1})), -4.0);
    for (std::uint64_t k : {0ull, 1ull, 7ull, 1000000ull}) {
        EXPECT_EQ(l2_statistic(hist({k, 0}), hist({0, 0})), static_cast<double>(k * k - k));
    }
    // Stays exact where k^2 would overflow 64 bits.
    const std::uint64_t big = std::uint64_t{1} << 33;
    EXPECT_EQ(l2_statistic(hist({big}), hist({big})), -static_cast<double>(2 * big));
}

TEST(L2Estimate, ClampsNegativeStatistic) {
    const EstimateResult e = l2_estimate(hist({2, 0}, 2), hist({1, 1}, 2));
    EXPECT_EQ(e.raw_statistic, -2.0);
    EXPECT_EQ(e.estimate, 0.0);
    EXPECT_TRUE(e.clamped);
    const EstimateResult f = l2_estimate(hist({3, 0}, 2), hist({0, 0}, 2));
    EXPECT_DOUBLE_EQ(f.estimate, std::sqrt(6.0) / 2);
    EXPECT_FALSE(f.clamped);
    EXPECT_THROW(l2_estimate(hist({3, 0}, 2), hist({0, 0}, 3)), std::invalid_argument);
}

TEST(RobustL2, MidpointRule) {
    // Estimate sqrt(6) with m = 1.
    const auto x = hist({3, 0}, 1), y = hist({0, 0}, 1);
    const double est = std::sqrt(6.0);
    EXPECT_EQ(l2_robust_test(x, y, est / 1.2).decision, Decision::Equal);
    EXPECT_EQ(l2_robust_test(x, y, est / 1.8).decision, Decision::Different);
    const TestVerdict v = l2_robust_test(x, y, 1.0);
    EXPECT_DOUBLE_EQ(v.threshold, 1.5);
    ASSERT_TRUE(v.clamped.has_value());
    EXPECT_FALSE(*v.clamped);
}

TEST(Analytic, L1TermExpectationMatchesSummation) {
    EXPECT_EQ(analytic_l1_term_expectation(0.1, 0.1, 50), 0.0);
    EXPECT_EQ(analytic_l1_term_expectation(0.0, 0.0, 50), 0.0);
    EXPECT_NEAR(analytic_l1_term_expectation(0.2, 0.0, 10), 2.0 * (1 - (1 - std::exp(-2.0)) / 2), 1e-14);
    EXPECT_NEAR(analytic_l1_term_expectation(0.2, 0.0, 10), 1.13534, 1e-5);
    const double cases[][3] = {{0.2, 0, 10}, {0.3, 0.1, 10}, {0.05, 0.01, 100}, {1e-4, 3e-4, 7},
                               {0.5, 0.49, 1000}, {1e-9, 0, 1}};
    for (const auto& c : cases) {
        const double ref = static_cast<double>(oracle::l1_term_mean(c[0], c[1], c[2]));
        EXPECT_NEAR(analytic_l1_term_expectation(c[0], c[1], static_cast<std::uint64_t>(c[2])), ref,
                    1e-10 * std::max(1.0, std::abs(ref)) + 1e-18)
            << c[0] << " " << c[1] << " " << c[2];
    }
}

TEST(Analytic, GFunction) {
    EXPECT_NEAR(g_function(1.0), std::numbers::e, 1e-12);
    for (double a : {1e-8, 1e-4, 0.01, 0.5, 1.0, 3.0, 10.0, 100.0}) {
        EXPECT_LE(g_function(a), 2 + a + 1e-12) << a;
        EXPECT_GE(g_function(a), 2.0 - 1e-9) << a;
    }
    EXPECT_NEAR(one_minus_exp_over(1e-9), 1 - 0.5e-9, 1e-15);
    EXPECT_NEAR(one_minus_exp_over(2.0), (1 - std::exp(-2.0)) / 2, 1e-15);
}

TEST(Analytic, L1BoundsSandwichExactExpectation) {
    const auto u = DiscreteDistribution::uniform(100);
    EXPECT_EQ(analytic_l1_expectation_lower_bound(u, u, 500), 0.0);
    EXPECT_DOUBLE_EQ(analytic_l1_variance_upper_bound(u, u, 500), 200.0);
    EXPECT_DOUBLE_EQ(analytic_l1_variance_upper_bound(u, u, 30), 60.0);
    std::vector<double> v(100);
    for (std::size_t i = 0; i < 100; ++i) v[i] = (i % 2 ? 1.4 : 0.6) / 100;
    const auto q = DiscreteDistribution::from_probs(v);
    for (std::uint64_t m : {10ull, 100ull, 1000ull, 100000ull}) {
        EXPECT_GE(analytic_l1_expectation(u, q, m), analytic_l1_expectation_lower_bound(u, q, m)) << m;
    }
}

TEST(Analytic, L2TermVariance) {
    EXPECT_EQ(analytic_l2_term_variance(0, 0, 10), 0.0);
    EXPECT_NEAR(analytic_l2_term_variance(0.3, 0.1, 10), 96.0, 1e-9);
    const double cases[][3] = {{0.3, 0.1, 10}, {0.01, 0.02, 100}, {0.2, 0.2, 25}, {0.001, 0, 500}};
    for (const auto& c : cases) {
        const double ref = static_cast<double>(oracle::l2_term_variance(c[0], c[1], c[2]));
        EXPECT_NEAR(analytic_l2_term_variance(c[0], c[1], static_cast<std::uint64_t>(c[2])), ref, 1e-8 * ref);
    }
}

TEST(MonteCarlo, L2UnbiasedOnDisjointPair) {
    const auto p = DiscreteDistribution::from_probs({1, 0});
    const auto q = DiscreteDistribution::from_probs({0, 1});
    const std::uint64_t m = 100;
    std::vector<double> values;
    for (std::uint64_t t = 0; t < 100000; ++t) {
        Rng rng = Rng::stream(21, t);
        values.push_back(l2_statistic(sample_histogram_poissonized(p, m, rng),
                                      sample_histogram_poissonized(q, m, rng)) /
                         static_cast<double>(m * m));
    }
    CompensatedSum s, s2;
    for (double v : values) s += v;
    const double mean = s.value() / values.size();
    for (double v : values) s2 += (v - mean) * (v - mean);
    const double se = std::sqrt(s2.value() / (values.size() - 1) / values.size());
    EXPECT_NEAR(mean, 2.0, 5 * se);
}
