#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "closeness/distribution.hpp"
#include "closeness/filtering.hpp"
#include "closeness/testers.hpp"

namespace closeness {

enum class TesterKind { L1, L1Deviation, L2Robust, L1Filtered };

std::string to_string(TesterKind t);
/// Accepts "l1", "l1-deviation", "l2-robust", "l1-filtered".
TesterKind parse_tester(const std::string& name);

inline constexpr double kDefaultTargetError = 1.0 / 3.0;
inline constexpr double kDefaultCalibrationQuantile = 5.0 / 6.0;
inline constexpr std::uint64_t kDefaultProbeTrials = 400;
inline constexpr std::uint64_t kDefaultCalibrationTrials = 1000;

enum class CalibrationNull { Uniform, Instance };

struct ExperimentConfig {
    InstanceSpec instance;
    /// Null hypothesis instance; p = q = its p. Defaults to the
    /// alternative instance's p.
    std::optional<InstanceSpec> null_instance;
    TesterKind tester = TesterKind::L1;
    /// Sample sizes for estimate_error_rates. For L1Filtered, m is the
    /// per-distribution budget m1 + m2.
    std::vector<std::uint64_t> m_grid;
    /// Search bounds for find_critical_m.
    std::uint64_t m_lo = 16;
    std::uint64_t m_hi = std::uint64_t{1} << 24;
    /// Bisection stops once the bracket ratio is within 1 + this.
    double m_resolution = 0.05;
    std::uint64_t trials = kDefaultProbeTrials;
    std::uint64_t master_seed = 0;
    double target_error = kDefaultTargetError;
    /// Distance parameter: the robust l2 eps, or the filtered l1 eps.
    double eps = 0;
    /// Fixed l1 constant; calibrated per m under uniform(n) when unset.
    std::optional<double> l1_C;
    /// Fixed filtered constants; when unset kappa1 = kappa2 is derived from m.
    std::optional<FilteredParams> filtered;
    /// Null used to calibrate l1 thresholds: uniform(n), or the
    /// instance's own p = q.
    CalibrationNull calibration_null = CalibrationNull::Uniform;
    std::uint64_t calibration_trials = kDefaultCalibrationTrials;
    double calibration_quantile = kDefaultCalibrationQuantile;
    unsigned threads = 1;

    explicit ExperimentConfig(InstanceSpec inst) : instance(std::move(inst)) {}
};

/// Error rates at one sample size, with binomial standard errors.
struct ErrorRates {
    std::uint64_t m = 0;
    std::uint64_t trials = 0;
    double err_null = 0;
    double err_alt = 0;
    double se_null = 0;
    double se_alt = 0;
    /// Constant(s) in force: C for L1, the calibrated null quantile for
    /// L1Deviation, the threshold for L2Robust, kappa1/kappa2 for
    /// L1Filtered.
    double constant = 0;
    double constant2 = 0;

    /// Both rates <= target + slack * standard error.
    bool passes(double target, double slack = 2.0) const;
};

struct ExperimentResult {
    std::string instance;
    std::string tester;
    std::size_t n = 0;
    double eps = 0;
    std::uint64_t seed = 0;
    std::vector<ErrorRates> rates;
    std::optional<std::uint64_t> critical_m;
    /// Failing probe just below critical_m, when one was made.
    std::optional<ErrorRates> below_critical;
    double wall_time_s = 0;
};

/// Binomial standard error sqrt(r (1 - r) / trials).
double binomial_se(double rate, std::uint64_t trials);

// ---------------------------------------------------------------------------
// Parallel trial runner
// ---------------------------------------------------------------------------

/// Runs fn(state, index) for index in [0, count) on `threads` workers,
/// each with its own state from make_state(). Results are stored by index,
/// so output is independent of the thread count.
template <typename MakeState, typename Fn>
auto run_trials(std::uint64_t count, unsigned threads, MakeState make_state, Fn fn) {
    using State = decltype(make_state());
    using Result = decltype(fn(std::declval<State&>(), std::uint64_t{}));
    std::vector<Result> results(count);
    const unsigned workers =
        static_cast<unsigned>(std::max<std::uint64_t>(1, std::min<std::uint64_t>(threads, count)));
    auto work = [&](unsigned w) {
        State state = make_state();
        for (std::uint64_t i = w; i < count; i += workers) {
            results[i] = fn(state, i);
        }
    };
    if (workers == 1) {
        work(0);
        return results;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back(work, w);
    }
    pool.clear();
    return results;
}

// ---------------------------------------------------------------------------
// Calibration
// ---------------------------------------------------------------------------

struct ThresholdCalibration {
    double C = 0;
    double quantile = 0;
    std::uint64_t trials = 0;
    /// Half-width of the order-statistic band q T +/- sqrt(T q (1-q)).
    double se = 0;
};

/// Empirical `quantile` of Z / sqrt(m) under p = q = uniform(n).
/// Requires trials >= 1000.
ThresholdCalibration calibrate_threshold(std::size_t n, std::uint64_t m, std::uint64_t trials,
                                         double quantile, std::uint64_t master_seed,
                                         unsigned threads = 1);

/// Same, under p = q = `null`.
ThresholdCalibration calibrate_threshold(const DiscreteDistribution& null, std::uint64_t m,
                                         std::uint64_t trials, double quantile,
                                         std::uint64_t master_seed, unsigned threads = 1);

/// Empirical quantile (inverse ECDF) of unsorted values.
double empirical_quantile(std::vector<double> values, double quantile);

/// kappa1 = kappa2 = kappa such that m1 + m2 is about `budget`.
FilteredParams filtered_params_for_budget(std::size_t n, double eps, std::uint64_t budget);

// ---------------------------------------------------------------------------
// Error rates and critical sample size
// ---------------------------------------------------------------------------

ErrorRates estimate_error_rates_at(const ExperimentConfig& config, std::uint64_t m);

/// Error rates at every m in config.m_grid (or at the budget implied by
/// fixed filtered constants).
ExperimentResult estimate_error_rates(const ExperimentConfig& config);

class BracketError : public std::runtime_error {
public:
    BracketError(const std::string& what, ErrorRates lo, ErrorRates hi)
        : std::runtime_error(what), lo_rates(lo), hi_rates(hi) {}
    ErrorRates lo_rates;
    ErrorRates hi_rates;
};

/// Smallest m passing at target_error + 2 se: doubling from m_lo, then
/// bisection. Every probe reuses the same trial seeds.
ExperimentResult find_critical_m(const ExperimentConfig& config);

/// Filtered constants fitted in two stages: kappa1 is the smallest Step 1
/// budget whose null false-reject rate is within target/2, then kappa2 is
/// the smallest Step 2 budget for which the whole test is within target.
struct FilteredCalibration {
    std::size_t n = 0;
    double eps = 0;
    double b = 0;
    double kappa1 = 0;
    double kappa2 = 0;
    std::uint64_t m1 = 0;
    std::uint64_t m2 = 0;
    /// Error rates of the full test at (kappa1, kappa2).
    ErrorRates rates;
    std::vector<ErrorRates> step1;
    std::vector<ErrorRates> step2;

    std::uint64_t total() const { return m1 + m2; }
};

/// Uses instance/null_instance, eps, trials, master_seed, target_error,
/// m_lo, m_hi, m_resolution and threads from `config`.
FilteredCalibration calibrate_filtered(const ExperimentConfig& config);

struct ScalingFit {
    double slope = 0;
    double stderr_slope = 0;
    double intercept = 0;
};

/// Least-squares slope of log(y) on log(x). Needs >= 3 positive points and
/// distinct x.
ScalingFit fit_scaling_exponent(const std::vector<std::pair<double, double>>& points);

// ---------------------------------------------------------------------------
// Moment verification
// ---------------------------------------------------------------------------

struct SampleMoments {
    std::uint64_t trials = 0;
    double mean = 0;
    double variance = 0;  // unbiased
    double se_mean = 0;
    double se_variance = 0;
};

SampleMoments sample_moments(const std::vector<double>& values);

enum class CheckKind {
    TwoSided,    // |observed - expected| <= tolerance
    AtLeast,     // observed + tolerance >= expected
    AtMost,      // observed - tolerance <= expected
};

struct MomentCheck {
    std::string name;
    CheckKind kind = CheckKind::TwoSided;
    double observed = 0;
    double expected = 0;
    double tolerance = 0;
    bool passed = false;
};

MomentCheck make_check(std::string name, CheckKind kind, double observed, double expected,
                       double tolerance);

struct MomentReport {
    std::size_t n = 0;
    std::uint64_t m = 0;
    std::uint64_t trials = 0;
    std::vector<MomentCheck> checks;
    bool all_passed() const;
};

/// Monte Carlo moments of both statistics against the closed forms:
/// l1 mean (exact per-term expectation, 5 se), l1 mean lower bound and
/// variance upper bound (one-sided, 5 se), l2 mean (5 se) and l2 variance
/// (10% relative). Requires trials >= 10^4.
MomentReport verify_moments(const DiscreteDistribution& p, const DiscreteDistribution& q,
                            std::uint64_t m, std::uint64_t trials, std::uint64_t master_seed,
                            unsigned threads = 1);

/// Monte Carlo of a single l1 term against analytic_l1_term_expectation.
MomentCheck verify_l1_term_expectation(double p_i, double q_i, std::uint64_t m,
                                       std::uint64_t trials, std::uint64_t master_seed,
                                       unsigned threads = 1);

/// Monte Carlo variance of a single l2 term against
/// analytic_l2_term_variance, 10% relative.
MomentCheck verify_l2_term_variance(double p_i, double q_i, std::uint64_t m, std::uint64_t trials,
                                    std::uint64_t master_seed, unsigned threads = 1);

}  // namespace closeness
