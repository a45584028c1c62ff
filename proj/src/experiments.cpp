#include "closeness/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "closeness/numeric.hpp"

namespace closeness {

namespace {

enum SeedTag : std::uint64_t { kNullTrials = 1, kAltTrials = 2, kCalibration = 3, kMoments = 4 };

struct HistogramPair {
    CountHistogram x;
    CountHistogram y;
};

double family_eps(const InstanceSpec& spec, double fallback) {
    return std::visit(
        [fallback](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, family::TwoBumpL1> ||
                          std::is_same_v<T, family::PerturbedUniformL2>) {
                return fallback > 0.0 ? fallback : f.eps;
            } else {
                return fallback;
            }
        },
        spec.family());
}

/// Fraction of `true` outcomes.
double rate_of(const std::vector<char>& wrong) {
    std::uint64_t count = 0;
    for (char w : wrong) count += w ? 1 : 0;
    return wrong.empty() ? 0.0 : static_cast<double>(count) / static_cast<double>(wrong.size());
}

/// Draws `trials` statistic values for pairs (x ~ sx, y ~ sy).
template <typename Stat>
std::vector<double> simulate_statistic(const PoissonizedHistogramSampler& sx,
                                       const PoissonizedHistogramSampler& sy, std::uint64_t trials,
                                       std::uint64_t seed, unsigned threads, Stat stat) {
    return run_trials(
        trials, threads, [] { return HistogramPair{}; },
        [&](HistogramPair& ws, std::uint64_t i) {
            Rng rng = Rng::stream(seed, i);
            sx(rng, ws.x);
            sy(rng, ws.y);
            return stat(ws.x, ws.y);
        });
}

/// Trial outcomes (1 = wrong decision) for a threshold rule "Equal iff
/// statistic <= threshold".
template <typename Stat>
std::vector<char> threshold_errors(const PoissonizedHistogramSampler& sx,
                                   const PoissonizedHistogramSampler& sy, std::uint64_t trials,
                                   std::uint64_t seed, unsigned threads, Stat stat,
                                   double threshold, bool expect_equal) {
    return run_trials(
        trials, threads, [] { return HistogramPair{}; },
        [&](HistogramPair& ws, std::uint64_t i) -> char {
            Rng rng = Rng::stream(seed, i);
            sx(rng, ws.x);
            sy(rng, ws.y);
            const bool equal = stat(ws.x, ws.y) <= threshold;
            return equal != expect_equal ? 1 : 0;
        });
}

}  // namespace

std::string to_string(TesterKind t) {
    switch (t) {
        case TesterKind::L1: return "l1";
        case TesterKind::L1Deviation: return "l1-deviation";
        case TesterKind::L2Robust: return "l2-robust";
        case TesterKind::L1Filtered: return "l1-filtered";
    }
    return "unknown";
}

TesterKind parse_tester(const std::string& name) {
    if (name == "l1") return TesterKind::L1;
    if (name == "l1-deviation") return TesterKind::L1Deviation;
    if (name == "l2-robust") return TesterKind::L2Robust;
    if (name == "l1-filtered") return TesterKind::L1Filtered;
    throw std::invalid_argument("unknown tester '" + name + "'");
}

double binomial_se(double rate, std::uint64_t trials) {
    if (trials == 0) return 0.0;
    return std::sqrt(rate * (1.0 - rate) / static_cast<double>(trials));
}

bool ErrorRates::passes(double target, double slack) const {
    return err_null <= target + slack * se_null && err_alt <= target + slack * se_alt;
}

// ---------------------------------------------------------------------------

double empirical_quantile(std::vector<double> values, double quantile) {
    if (values.empty()) {
        throw std::invalid_argument("quantile of an empty sample");
    }
    if (!(quantile > 0.0 && quantile <= 1.0)) {
        throw std::invalid_argument("quantile must be in (0, 1]");
    }
    const auto count = static_cast<double>(values.size());
    auto rank = static_cast<std::size_t>(std::ceil(quantile * count));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    auto nth = values.begin() + static_cast<std::ptrdiff_t>(rank - 1);
    std::nth_element(values.begin(), nth, values.end());
    return *nth;
}

ThresholdCalibration calibrate_threshold(std::size_t n, std::uint64_t m, std::uint64_t trials,
                                         double quantile, std::uint64_t master_seed,
                                         unsigned threads) {
    return calibrate_threshold(DiscreteDistribution::uniform(n), m, trials, quantile, master_seed,
                               threads);
}

ThresholdCalibration calibrate_threshold(const DiscreteDistribution& null, std::uint64_t m,
                                         std::uint64_t trials, double quantile,
                                         std::uint64_t master_seed, unsigned threads) {
    if (trials < 1000) {
        throw std::invalid_argument("threshold calibration requires at least 1000 trials");
    }
    if (m == 0) {
        throw std::invalid_argument("threshold calibration requires m >= 1");
    }
    const PoissonizedHistogramSampler sampler(null, m);
    const double root_m = std::sqrt(static_cast<double>(m));
    std::vector<double> scaled = simulate_statistic(
        sampler, sampler, trials, master_seed, threads,
        [root_m](const CountHistogram& x, const CountHistogram& y) {
            return l1_statistic(x, y) / root_m;
        });

    ThresholdCalibration cal;
    cal.quantile = quantile;
    cal.trials = trials;
    std::sort(scaled.begin(), scaled.end());
    const double t = static_cast<double>(trials);
    auto at_rank = [&](double r) {
        const auto idx = static_cast<std::size_t>(std::clamp(std::ceil(r), 1.0, t)) - 1;
        return scaled[idx];
    };
    cal.C = at_rank(quantile * t);
    const double band = std::sqrt(t * quantile * (1.0 - quantile));
    cal.se = 0.5 * (at_rank(quantile * t + band) - at_rank(quantile * t - band));
    return cal;
}

FilteredParams filtered_params_for_budget(std::size_t n, double eps, std::uint64_t budget) {
    const FilteredPlan unit = plan_filtered_test(n, eps, FilteredParams{});
    const double per_kappa = 1.0 / (eps * eps * unit.b) +
                             std::sqrt(2.0 * unit.b) * static_cast<double>(n) / (eps * eps);
    FilteredParams params;
    params.kappa1 = static_cast<double>(budget) / per_kappa;
    params.kappa2 = params.kappa1;
    return params;
}

// ---------------------------------------------------------------------------

ErrorRates estimate_error_rates_at(const ExperimentConfig& config, std::uint64_t m) {
    if (config.trials == 0) {
        throw std::invalid_argument("experiment requires trials >= 1");
    }
    if (m == 0) {
        throw std::invalid_argument("experiment requires m >= 1");
    }
    const auto [p, q] = config.instance.with_role(InstanceRole::Alternative).materialize();
    const DiscreteDistribution p0 =
        (config.null_instance ? *config.null_instance : config.instance).materialize().first;
    if (p0.size() != p.size()) {
        throw std::invalid_argument("null and alternative instances differ in domain size");
    }
    const std::size_t n = p.size();
    const std::uint64_t null_seed = Rng::derive_seed(config.master_seed, kNullTrials);
    const std::uint64_t alt_seed = Rng::derive_seed(config.master_seed, kAltTrials);
    const std::uint64_t cal_seed = Rng::derive_seed(config.master_seed, kCalibration);

    ErrorRates rates;
    rates.m = m;
    rates.trials = config.trials;
    std::vector<char> null_wrong;
    std::vector<char> alt_wrong;

    switch (config.tester) {
        case TesterKind::L1:
        case TesterKind::L1Deviation:
        case TesterKind::L2Robust: {
            const PoissonizedHistogramSampler s0(p0, m);
            const PoissonizedHistogramSampler sp(p, m);
            const PoissonizedHistogramSampler sq(q, m);
            auto run = [&](auto stat, double threshold) {
                null_wrong = threshold_errors(s0, s0, config.trials, null_seed, config.threads, stat,
                                              threshold, true);
                alt_wrong = threshold_errors(sp, sq, config.trials, alt_seed, config.threads, stat,
                                             threshold, false);
            };
            if (config.tester == TesterKind::L1) {
                const DiscreteDistribution cal_null =
                    config.calibration_null == CalibrationNull::Uniform
                        ? DiscreteDistribution::uniform(n)
                        : p0;
                const double C = config.l1_C ? *config.l1_C
                                             : calibrate_threshold(cal_null, m,
                                                                   config.calibration_trials,
                                                                   config.calibration_quantile,
                                                                   cal_seed, config.threads)
                                                   .C;
                rates.constant = C;
                auto stat = [](const CountHistogram& x, const CountHistogram& y) {
                    return l1_statistic(x, y);
                };
                run(stat, C * std::sqrt(static_cast<double>(m)));
            } else if (config.tester == TesterKind::L1Deviation) {
                const DiscreteDistribution cal_null =
                    config.calibration_null == CalibrationNull::Uniform
                        ? DiscreteDistribution::uniform(n)
                        : p0;
                const PoissonizedHistogramSampler su(cal_null, m);
                auto stat = [](const CountHistogram& x, const CountHistogram& y) {
                    return l1_deviation_statistic(x, y);
                };
                const double threshold = empirical_quantile(
                    simulate_statistic(su, su, config.calibration_trials, cal_seed, config.threads,
                                       stat),
                    config.calibration_quantile);
                rates.constant = threshold;
                run(stat, threshold);
            } else {
                if (!(config.eps > 0.0)) {
                    throw std::invalid_argument("robust l2 experiment requires eps > 0");
                }
                const double threshold = kRobustThresholdFactor * config.eps;
                rates.constant = threshold;
                const double md = static_cast<double>(m);
                auto stat = [md](const CountHistogram& x, const CountHistogram& y) {
                    return std::sqrt(std::max(l2_statistic(x, y), 0.0)) / md;
                };
                run(stat, threshold);
            }
            break;
        }
        case TesterKind::L1Filtered: {
            const double eps = family_eps(config.instance, config.eps);
            const FilteredParams params =
                config.filtered ? *config.filtered : filtered_params_for_budget(n, eps, m);
            rates.constant = params.kappa1;
            rates.constant2 = params.kappa2;
            const AliasSampler a0(p0);
            const AliasSampler ap(p);
            const AliasSampler aq(q);
            null_wrong = run_trials(
                config.trials, config.threads, [] { return 0; },
                [&](int&, std::uint64_t i) -> char {
                    const auto v = l1_filtered_test(a0, a0, eps, params, Rng::derive_seed(null_seed, i));
                    return v.decision == Decision::Different ? 1 : 0;
                });
            alt_wrong = run_trials(
                config.trials, config.threads, [] { return 0; },
                [&](int&, std::uint64_t i) -> char {
                    const auto v = l1_filtered_test(ap, aq, eps, params, Rng::derive_seed(alt_seed, i));
                    return v.decision == Decision::Equal ? 1 : 0;
                });
            break;
        }
    }
    rates.err_null = rate_of(null_wrong);
    rates.err_alt = rate_of(alt_wrong);
    rates.se_null = binomial_se(rates.err_null, config.trials);
    rates.se_alt = binomial_se(rates.err_alt, config.trials);
    return rates;
}

namespace {

ExperimentResult result_header(const ExperimentConfig& config) {
    ExperimentResult result;
    result.instance = config.instance.name();
    result.tester = to_string(config.tester);
    result.n = config.instance.domain_size();
    result.eps = family_eps(config.instance, config.eps);
    result.seed = config.master_seed;
    return result;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

ExperimentResult estimate_error_rates(const ExperimentConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    ExperimentResult result = result_header(config);
    if (config.tester == TesterKind::L1Filtered && config.filtered) {
        const FilteredPlan plan =
            plan_filtered_test(config.instance.domain_size(), result.eps, *config.filtered);
        result.rates.push_back(estimate_error_rates_at(config, total_samples(plan)));
    } else {
        if (config.m_grid.empty()) {
            throw std::invalid_argument("experiment needs at least one m");
        }
        for (auto m : config.m_grid) {
            result.rates.push_back(estimate_error_rates_at(config, m));
        }
    }
    result.wall_time_s = seconds_since(start);
    return result;
}

namespace {

struct SearchOutcome {
    std::vector<ErrorRates> probes;
    ErrorRates pass;
    std::optional<ErrorRates> fail;
};

/// Doubling from lo, then geometric bisection down to `resolution`.
template <typename Probe>
SearchOutcome search_critical(std::uint64_t lo, std::uint64_t hi, double resolution, double target,
                              Probe probe_fn) {
    if (lo == 0 || hi < lo) {
        throw std::invalid_argument("critical-m search needs 1 <= m_lo <= m_hi");
    }
    SearchOutcome out;
    auto probe = [&](std::uint64_t m) {
        ErrorRates r = probe_fn(m);
        out.probes.push_back(r);
        return r;
    };
    auto ok = [&](const ErrorRates& r) { return r.passes(target); };

    ErrorRates fail = probe(lo);
    if (ok(fail)) {
        out.pass = fail;
        return out;
    }
    ErrorRates pass;
    for (std::uint64_t m = lo;;) {
        m = std::min(m * 2, hi);
        ErrorRates r = probe(m);
        if (ok(r)) {
            pass = r;
            break;
        }
        if (m == hi) {
            std::ostringstream msg;
            msg << "critical-m bracket [" << lo << ", " << hi
                << "] does not contain the transition: error rates at m_lo = ("
                << out.probes.front().err_null << ", " << out.probes.front().err_alt
                << "), at m_hi = (" << r.err_null << ", " << r.err_alt << ")";
            throw BracketError(msg.str(), out.probes.front(), r);
        }
        fail = r;
    }
    while (pass.m > fail.m + 1 &&
           static_cast<double>(pass.m) > static_cast<double>(fail.m) * (1.0 + resolution)) {
        auto mid = static_cast<std::uint64_t>(
            std::llround(std::sqrt(static_cast<double>(fail.m) * static_cast<double>(pass.m))));
        mid = std::clamp(mid, fail.m + 1, pass.m - 1);
        ErrorRates r = probe(mid);
        (ok(r) ? pass : fail) = r;
    }
    out.pass = pass;
    out.fail = fail;
    return out;
}

}  // namespace

ExperimentResult find_critical_m(const ExperimentConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    ExperimentResult result = result_header(config);
    SearchOutcome found =
        search_critical(config.m_lo, config.m_hi, config.m_resolution, config.target_error,
                        [&](std::uint64_t m) { return estimate_error_rates_at(config, m); });
    result.rates = std::move(found.probes);
    result.critical_m = found.pass.m;
    result.below_critical = found.fail;
    result.wall_time_s = seconds_since(start);
    return result;
}

FilteredCalibration calibrate_filtered(const ExperimentConfig& config) {
    if (config.trials == 0) {
        throw std::invalid_argument("filtered calibration requires trials >= 1");
    }
    const auto [p, q] = config.instance.with_role(InstanceRole::Alternative).materialize();
    const DiscreteDistribution p0 =
        (config.null_instance ? *config.null_instance : config.instance).materialize().first;
    if (p0.size() != p.size()) {
        throw std::invalid_argument("null and alternative instances differ in domain size");
    }
    const std::size_t n = p.size();
    const double eps = family_eps(config.instance, config.eps);
    const FilteredPlan unit = plan_filtered_test(n, eps, FilteredParams{});
    const double m1_per_kappa = 1.0 / (eps * eps * unit.b);
    const double m2_per_kappa = std::sqrt(2.0 * unit.b) * static_cast<double>(n) / (eps * eps);
    const std::uint64_t null_seed = Rng::derive_seed(config.master_seed, kNullTrials);
    const AliasSampler a0(p0);

    FilteredCalibration cal;
    cal.n = n;
    cal.eps = eps;
    cal.b = unit.b;

    // Step 1 alone: false rejections of the heavy check under the null.
    const SearchOutcome step1 = search_critical(
        config.m_lo, config.m_hi, config.m_resolution, config.target_error / 2.0,
        [&](std::uint64_t m1) {
            FilteredPlan plan = unit;
            plan.m1 = m1;
            const auto wrong = run_trials(
                config.trials, config.threads, [] { return 0; },
                [&](int&, std::uint64_t i) -> char {
                    return filtered_heavy_step(a0, a0, plan, Rng::derive_seed(null_seed, i)).rejects
                               ? 1
                               : 0;
                });
            ErrorRates r;
            r.m = m1;
            r.trials = config.trials;
            r.err_null = rate_of(wrong);
            r.se_null = binomial_se(r.err_null, config.trials);
            return r;
        });
    cal.m1 = step1.pass.m;
    cal.kappa1 = static_cast<double>(cal.m1) / m1_per_kappa;
    cal.step1 = step1.probes;

    // Full test with kappa1 fixed; the search runs over m2.
    ExperimentConfig full = config;
    full.tester = TesterKind::L1Filtered;
    const SearchOutcome step2 = search_critical(
        config.m_lo, config.m_hi, config.m_resolution, config.target_error,
        [&](std::uint64_t m2) {
            FilteredParams params;
            params.kappa1 = cal.kappa1;
            params.kappa2 = static_cast<double>(m2) / m2_per_kappa;
            full.filtered = params;
            ErrorRates r = estimate_error_rates_at(full, m2);
            r.m = m2;
            return r;
        });
    cal.m2 = step2.pass.m;
    cal.kappa2 = static_cast<double>(cal.m2) / m2_per_kappa;
    cal.step2 = step2.probes;
    cal.rates = step2.pass;
    return cal;
}

ScalingFit fit_scaling_exponent(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) {
        throw std::invalid_argument("scaling fit needs at least 3 points");
    }
    std::vector<double> lx;
    std::vector<double> ly;
    for (const auto& [x, y] : points) {
        if (!(x > 0.0) || !(y > 0.0)) {
            throw std::invalid_argument("scaling fit needs positive coordinates");
        }
        lx.push_back(std::log(x));
        ly.push_back(std::log(y));
    }
    const double k = static_cast<double>(points.size());
    const double mx = compensated_sum(lx) / k;
    const double my = compensated_sum(ly) / k;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx <= 1e-300) {
        throw std::invalid_argument("scaling fit is degenerate: all x are equal");
    }
    ScalingFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
        ssr += r * r;
    }
    fit.stderr_slope = std::sqrt(ssr / (k - 2.0) / sxx);
    return fit;
}

// ---------------------------------------------------------------------------

SampleMoments sample_moments(const std::vector<double>& values) {
    SampleMoments s;
    s.trials = values.size();
    if (values.empty()) return s;
    const double t = static_cast<double>(values.size());
    CompensatedSum sum;
    for (double v : values) sum.add(v);
    s.mean = sum.value() / t;
    CompensatedSum m2;
    CompensatedSum m4;
    for (double v : values) {
        const double d = v - s.mean;
        m2.add(d * d);
        m4.add(d * d * d * d);
    }
    if (values.size() > 1) {
        s.variance = m2.value() / (t - 1.0);
    }
    const double pop_var = m2.value() / t;
    s.se_mean = std::sqrt(s.variance / t);
    s.se_variance = std::sqrt(std::max(m4.value() / t - pop_var * pop_var, 0.0) / t);
    return s;
}

MomentCheck make_check(std::string name, CheckKind kind, double observed, double expected,
                       double tolerance) {
    MomentCheck c{std::move(name), kind, observed, expected, tolerance, false};
    switch (kind) {
        case CheckKind::TwoSided: c.passed = std::abs(observed - expected) <= tolerance; break;
        case CheckKind::AtLeast: c.passed = observed + tolerance >= expected; break;
        case CheckKind::AtMost: c.passed = observed - tolerance <= expected; break;
    }
    return c;
}

bool MomentReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const MomentCheck& c) { return c.passed; });
}

MomentReport verify_moments(const DiscreteDistribution& p, const DiscreteDistribution& q,
                            std::uint64_t m, std::uint64_t trials, std::uint64_t master_seed,
                            unsigned threads) {
    if (trials < 10000) {
        throw std::invalid_argument("moment verification requires at least 10^4 trials");
    }
    if (p.size() != q.size()) {
        throw std::invalid_argument("dimension mismatch");
    }
    const PoissonizedHistogramSampler sp(p, m);
    const PoissonizedHistogramSampler sq(q, m);
    const std::uint64_t seed = Rng::derive_seed(master_seed, kMoments);
    const auto pairs = run_trials(
        trials, threads, [] { return HistogramPair{}; },
        [&](HistogramPair& ws, std::uint64_t i) {
            Rng rng = Rng::stream(seed, i);
            sp(rng, ws.x);
            sq(rng, ws.y);
            return std::pair{l1_statistic(ws.x, ws.y), l2_statistic(ws.x, ws.y)};
        });
    std::vector<double> z1(trials);
    std::vector<double> z2(trials);
    for (std::uint64_t i = 0; i < trials; ++i) {
        z1[i] = pairs[i].first;
        z2[i] = pairs[i].second;
    }
    const SampleMoments s1 = sample_moments(z1);
    const SampleMoments s2 = sample_moments(z2);
    const double md = static_cast<double>(m);
    const double l2 = l2_distance(p, q);

    MomentReport report;
    report.n = p.size();
    report.m = m;
    report.trials = trials;
    report.checks.push_back(make_check("l1_mean", CheckKind::TwoSided, s1.mean,
                                       analytic_l1_expectation(p, q, m), 5.0 * s1.se_mean));
    report.checks.push_back(make_check("l1_mean_lower_bound", CheckKind::AtLeast, s1.mean,
                                       analytic_l1_expectation_lower_bound(p, q, m),
                                       5.0 * s1.se_mean));
    report.checks.push_back(make_check("l1_variance_upper_bound", CheckKind::AtMost, s1.variance,
                                       analytic_l1_variance_upper_bound(p, q, m),
                                       5.0 * s1.se_variance));
    report.checks.push_back(make_check("l2_mean", CheckKind::TwoSided, s2.mean, md * md * l2 * l2,
                                       5.0 * s2.se_mean));
    const double l2_var = analytic_l2_variance(p, q, m);
    report.checks.push_back(
        make_check("l2_variance", CheckKind::TwoSided, s2.variance, l2_var, 0.1 * l2_var));
    return report;
}

namespace {

template <typename Term>
std::vector<double> simulate_term(double p_i, double q_i, std::uint64_t m, std::uint64_t trials,
                                  std::uint64_t master_seed, unsigned threads, Term term) {
    const double md = static_cast<double>(m);
    const PoissonSampler sx(md * p_i);
    const PoissonSampler sy(md * q_i);
    const std::uint64_t seed = Rng::derive_seed(master_seed, kMoments);
    return run_trials(
        trials, threads, [] { return 0; },
        [&](int&, std::uint64_t i) {
            Rng rng = Rng::stream(seed, i);
            const std::uint64_t x = sx(rng);
            const std::uint64_t y = sy(rng);
            return term(x, y);
        });
}

}  // namespace

MomentCheck verify_l1_term_expectation(double p_i, double q_i, std::uint64_t m,
                                       std::uint64_t trials, std::uint64_t master_seed,
                                       unsigned threads) {
    const auto values =
        simulate_term(p_i, q_i, m, trials, master_seed, threads, [](std::uint64_t x, std::uint64_t y) {
            const CountHistogram hx(std::vector<std::uint64_t>{x}, SamplingMode::Poissonized, 0);
            const CountHistogram hy(std::vector<std::uint64_t>{y}, SamplingMode::Poissonized, 0);
            return l1_statistic(hx, hy);
        });
    const SampleMoments s = sample_moments(values);
    return make_check("l1_term_mean", CheckKind::TwoSided, s.mean,
                      analytic_l1_term_expectation(p_i, q_i, m), 5.0 * s.se_mean);
}

MomentCheck verify_l2_term_variance(double p_i, double q_i, std::uint64_t m, std::uint64_t trials,
                                    std::uint64_t master_seed, unsigned threads) {
    const auto values =
        simulate_term(p_i, q_i, m, trials, master_seed, threads, [](std::uint64_t x, std::uint64_t y) {
            const CountHistogram hx(std::vector<std::uint64_t>{x}, SamplingMode::Poissonized, 0);
            const CountHistogram hy(std::vector<std::uint64_t>{y}, SamplingMode::Poissonized, 0);
            return l2_statistic(hx, hy);
        });
    const SampleMoments s = sample_moments(values);
    const double expected = analytic_l2_term_variance(p_i, q_i, m);
    return make_check("l2_term_variance", CheckKind::TwoSided, s.variance, expected, 0.1 * expected);
}

}  // namespace closeness
