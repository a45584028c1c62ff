#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "closeness/distribution.hpp"
#include "closeness/sampling.hpp"

namespace closeness {

enum class Decision { Equal, Different };

std::string to_string(Decision d);

struct TestVerdict {
    Decision decision = Decision::Equal;
    /// Z for the l1 rule; the distance estimate for the robust l2 rule.
    double statistic = 0;
    double threshold = 0;
    std::uint64_t m = 0;
    /// Set when the underlying l2 statistic was negative and clamped.
    std::optional<bool> clamped;
    /// Which step of a composed test decided ("heavy", "light").
    std::optional<std::string> stage;
    /// Per-element contributions, when requested.
    std::vector<double> terms;
};

struct EstimateResult {
    double estimate = 0;       // sqrt(max(Z, 0)) / m
    double raw_statistic = 0;  // Z, possibly negative
    bool clamped = false;      // Z < 0
    std::uint64_t m = 0;
};

/// sum_i ((X_i - Y_i)^2 - X_i - Y_i) / (X_i + Y_i), skipping X_i + Y_i = 0.
double l1_statistic(const CountHistogram& x, const CountHistogram& y);

/// Per-element terms of l1_statistic (zero where X_i + Y_i = 0).
std::vector<double> l1_statistic_terms(const CountHistogram& x, const CountHistogram& y);

/// Equal iff l1_statistic <= C sqrt(m).
TestVerdict l1_test(const CountHistogram& x, const CountHistogram& y, double C, bool with_terms = false);

/// Expected |H - j/2| for H ~ Binomial(j, 1/2), the centering term of
/// the deviation statistic.
double deviation_center(std::uint64_t j);

/// sum_i |X_i - Y_i| - deviation_center(X_i + Y_i).
double l1_deviation_statistic(const CountHistogram& x, const CountHistogram& y);

/// sum_i (X_i - Y_i)^2 - X_i - Y_i, accumulated exactly in 128-bit integers.
double l2_statistic(const CountHistogram& x, const CountHistogram& y);

EstimateResult l2_estimate(const CountHistogram& x, const CountHistogram& y);

/// Robust l2 rule: Equal ("distance <= eps") iff the estimate is at most
/// 1.5 eps; Different ("distance >= 2 eps") otherwise.
TestVerdict l2_robust_test(const CountHistogram& x, const CountHistogram& y, double eps);

inline constexpr double kRobustThresholdFactor = 1.5;

// ---------------------------------------------------------------------------
// Closed-form moments
// ---------------------------------------------------------------------------

/// (1 - e^{-alpha}) / alpha, series-expanded near zero.
double one_minus_exp_over(double alpha);

/// g(alpha) = alpha / (1 - (1 - e^{-alpha}) / alpha).
double g_function(double alpha);

/// Exact expectation of one l1 term under Poissonized sampling:
/// (p-q)^2/(p+q) * m * (1 - (1 - e^{-m(p+q)}) / (m(p+q))).
double analytic_l1_term_expectation(double p_i, double q_i, std::uint64_t m);

/// Sum of the per-term expectations.
double analytic_l1_expectation(const DiscreteDistribution& p, const DiscreteDistribution& q,
                               std::uint64_t m);

/// m^2 / (4n + 2m) * ||p - q||_1^2.
double analytic_l1_expectation_lower_bound(const DiscreteDistribution& p,
                                           const DiscreteDistribution& q, std::uint64_t m);

/// 2 min{n, m} + sum_i 5m (p_i - q_i)^2 / (p_i + q_i).
double analytic_l1_variance_upper_bound(const DiscreteDistribution& p,
                                        const DiscreteDistribution& q, std::uint64_t m);

/// Var[Z_i] = 4 (p-q)^2 (p+q) m^3 + 2 (p+q)^2 m^2.
double analytic_l2_term_variance(double p_i, double q_i, std::uint64_t m);

double analytic_l2_variance(const DiscreteDistribution& p, const DiscreteDistribution& q,
                            std::uint64_t m);

}  // namespace closeness
