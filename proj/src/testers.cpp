#include "closeness/testers.hpp"

#include <math.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "closeness/numeric.hpp"

namespace closeness {

namespace {

using wide_int = __int128;

void require_same_size(const CountHistogram& x, const CountHistogram& y) {
    if (x.size() != y.size()) {
        std::ostringstream msg;
        msg << "dimension mismatch: " << x.size() << " vs " << y.size();
        throw std::invalid_argument(msg.str());
    }
}

void require_same_m(const CountHistogram& x, const CountHistogram& y) {
    require_same_size(x, y);
    if (x.m() != y.m()) {
        std::ostringstream msg;
        msg << "histograms were drawn with different m: " << x.m() << " vs " << y.m();
        throw std::invalid_argument(msg.str());
    }
}

double l1_term(std::uint64_t xi, std::uint64_t yi) {
    const std::uint64_t s = xi + yi;
    const auto d = static_cast<double>(static_cast<std::int64_t>(xi - yi));
    return (d * d - static_cast<double>(s)) / static_cast<double>(s);
}

/// binomial(j-1, floor((j-1)/2)) is below 2^53 for j <= 50.
constexpr std::uint64_t kExactDeviationLimit = 50;

double central_binomial_exact(std::uint64_t top, std::uint64_t k) {
    std::uint64_t c = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        c = c * (top - k + i) / i;
    }
    return static_cast<double>(c);
}

}  // namespace

std::string to_string(Decision d) { return d == Decision::Equal ? "Equal" : "Different"; }

double l1_statistic(const CountHistogram& x, const CountHistogram& y) {
    require_same_size(x, y);
    const auto xs = x.counts();
    const auto ys = y.counts();
    CompensatedSum z;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] + ys[i] != 0) {
            z.add(l1_term(xs[i], ys[i]));
        }
    }
    return z.value();
}

std::vector<double> l1_statistic_terms(const CountHistogram& x, const CountHistogram& y) {
    require_same_size(x, y);
    std::vector<double> terms(x.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] + y[i] != 0) {
            terms[i] = l1_term(x[i], y[i]);
        }
    }
    return terms;
}

TestVerdict l1_test(const CountHistogram& x, const CountHistogram& y, double C, bool with_terms) {
    if (!(C > 0.0) || !std::isfinite(C)) {
        throw std::invalid_argument("l1 test constant C must be positive");
    }
    require_same_m(x, y);
    TestVerdict v;
    v.statistic = l1_statistic(x, y);
    v.threshold = C * std::sqrt(static_cast<double>(x.m()));
    v.m = x.m();
    v.decision = v.statistic <= v.threshold ? Decision::Equal : Decision::Different;
    if (with_terms) {
        v.terms = l1_statistic_terms(x, y);
    }
    return v;
}

double deviation_center(std::uint64_t j) {
    if (j == 0) return 0.0;
    const std::uint64_t top = j - 1;
    const std::uint64_t k = top / 2;
    if (j <= kExactDeviationLimit) {
        return std::ldexp(central_binomial_exact(top, k) * static_cast<double>(j),
                          -static_cast<int>(j));
    }
    int sign = 0;
    const long double log_binom = lgammal_r(static_cast<long double>(j), &sign) -
                                  lgammal_r(static_cast<long double>(k + 1), &sign) -
                                  lgammal_r(static_cast<long double>(top - k + 1), &sign);
    const long double log_f = log_binom + std::log(static_cast<long double>(j)) -
                              static_cast<long double>(j) * std::log(2.0L);
    return static_cast<double>(std::exp(log_f));
}

double l1_deviation_statistic(const CountHistogram& x, const CountHistogram& y) {
    require_same_size(x, y);
    CompensatedSum z;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const std::uint64_t s = x[i] + y[i];
        if (s == 0) continue;
        const std::uint64_t diff = x[i] > y[i] ? x[i] - y[i] : y[i] - x[i];
        z.add(static_cast<double>(diff) - deviation_center(s));
    }
    return z.value();
}

double l2_statistic(const CountHistogram& x, const CountHistogram& y) {
    require_same_size(x, y);
    wide_int z = 0;
    const auto xs = x.counts();
    const auto ys = y.counts();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const wide_int d = static_cast<wide_int>(xs[i]) - static_cast<wide_int>(ys[i]);
        z += d * d - static_cast<wide_int>(xs[i]) - static_cast<wide_int>(ys[i]);
    }
    return static_cast<double>(z);
}

EstimateResult l2_estimate(const CountHistogram& x, const CountHistogram& y) {
    require_same_m(x, y);
    if (x.m() == 0) {
        throw std::invalid_argument("l2 estimate requires m >= 1");
    }
    EstimateResult r;
    r.raw_statistic = l2_statistic(x, y);
    r.clamped = r.raw_statistic < 0.0;
    r.estimate = std::sqrt(std::max(r.raw_statistic, 0.0)) / static_cast<double>(x.m());
    r.m = x.m();
    return r;
}

TestVerdict l2_robust_test(const CountHistogram& x, const CountHistogram& y, double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) {
        throw std::invalid_argument("robust l2 test requires eps > 0");
    }
    const EstimateResult est = l2_estimate(x, y);
    TestVerdict v;
    v.statistic = est.estimate;
    v.threshold = kRobustThresholdFactor * eps;
    v.m = est.m;
    v.clamped = est.clamped;
    v.decision = v.statistic <= v.threshold ? Decision::Equal : Decision::Different;
    return v;
}

// ---------------------------------------------------------------------------

namespace {

void require_non_negative(double p_i, double q_i) {
    if (!(p_i >= 0.0) || !(q_i >= 0.0)) {
        throw std::invalid_argument("probabilities must be non-negative");
    }
}

/// 1 - (1 - e^{-alpha}) / alpha.
double one_minus_h(double alpha) {
    if (alpha < 1e-3) {
        // alpha/2 - alpha^2/6 + alpha^3/24 - alpha^4/120 + alpha^5/720
        return alpha * (0.5 - alpha * (1.0 / 6.0 - alpha * (1.0 / 24.0 - alpha * (1.0 / 120.0 -
                                                                               alpha / 720.0))));
    }
    return (alpha + std::expm1(-alpha)) / alpha;
}

void require_pair(const DiscreteDistribution& p, const DiscreteDistribution& q) {
    if (p.size() != q.size()) {
        throw std::invalid_argument("dimension mismatch");
    }
}

}  // namespace

double one_minus_exp_over(double alpha) {
    if (alpha < 1e-6) {
        return 1.0 - alpha * (0.5 - alpha * (1.0 / 6.0 - alpha / 24.0));
    }
    return -std::expm1(-alpha) / alpha;
}

double g_function(double alpha) {
    if (!(alpha > 0.0)) {
        throw std::invalid_argument("g(alpha) requires alpha > 0");
    }
    return alpha / one_minus_h(alpha);
}

double analytic_l1_term_expectation(double p_i, double q_i, std::uint64_t m) {
    require_non_negative(p_i, q_i);
    const double s = p_i + q_i;
    if (s == 0.0) return 0.0;
    const double d = p_i - q_i;
    const double md = static_cast<double>(m);
    return d * d / s * md * one_minus_h(md * s);
}

double analytic_l1_expectation(const DiscreteDistribution& p, const DiscreteDistribution& q,
                               std::uint64_t m) {
    require_pair(p, q);
    CompensatedSum total;
    for (std::size_t i = 0; i < p.size(); ++i) {
        total.add(analytic_l1_term_expectation(p[i], q[i], m));
    }
    return total.value();
}

double analytic_l1_expectation_lower_bound(const DiscreteDistribution& p,
                                           const DiscreteDistribution& q, std::uint64_t m) {
    const double l1 = l1_distance(p, q);
    const double md = static_cast<double>(m);
    const double nd = static_cast<double>(p.size());
    return md * md / (4.0 * nd + 2.0 * md) * l1 * l1;
}

double analytic_l1_variance_upper_bound(const DiscreteDistribution& p,
                                        const DiscreteDistribution& q, std::uint64_t m) {
    require_pair(p, q);
    const double md = static_cast<double>(m);
    CompensatedSum total;
    total.add(2.0 * std::min(static_cast<double>(p.size()), md));
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double s = p[i] + q[i];
        if (s > 0.0) {
            const double d = p[i] - q[i];
            total.add(5.0 * md * d * d / s);
        }
    }
    return total.value();
}

double analytic_l2_term_variance(double p_i, double q_i, std::uint64_t m) {
    require_non_negative(p_i, q_i);
    const double md = static_cast<double>(m);
    const double s = p_i + q_i;
    const double d = p_i - q_i;
    return 4.0 * d * d * s * md * md * md + 2.0 * s * s * md * md;
}

double analytic_l2_variance(const DiscreteDistribution& p, const DiscreteDistribution& q,
                            std::uint64_t m) {
    require_pair(p, q);
    CompensatedSum total;
    for (std::size_t i = 0; i < p.size(); ++i) {
        total.add(analytic_l2_term_variance(p[i], q[i], m));
    }
    return total.value();
}

}  // namespace closeness
