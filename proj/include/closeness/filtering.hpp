#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "closeness/distribution.hpp"
#include "closeness/rng.hpp"
#include "closeness/sampling.hpp"
#include "closeness/testers.hpp"

namespace closeness {

/// Empirical heavy/light partition of the domain at threshold b.
struct EmpiricalSplit {
    double b = 0;
    std::vector<double> p_hat;
    std::vector<double> q_hat;
    /// Sorted indices with p_hat >= b or q_hat >= b.
    std::vector<std::uint32_t> heavy_set;
    /// Sorted complement of heavy_set.
    std::vector<std::uint32_t> light_set;
};

/// Throws on a zero-total histogram or b outside (0, 1]; b above 1 is
/// accepted and yields an empty heavy set.
EmpiricalSplit split_heavy_light(const CountHistogram& x, const CountHistogram& y, double b);

/// sum over the heavy set of |p_hat_i - q_hat_i|.
double heavy_l1_estimate(const EmpiricalSplit& split);

/// Heavy mass w is removed and spread evenly over all n elements:
/// p'_i = p_i [i not heavy] + w / n.
DiscreteDistribution make_light_version(const DiscreteDistribution& p,
                                        const std::vector<std::uint32_t>& heavy_set);

/// Membership mask of an index set over [n].
std::vector<bool> index_mask(std::size_t n, const std::vector<std::uint32_t>& indices);

/// Poissonized counts of the light version of whatever `sampler` draws
/// from: draws landing in the heavy set are rerouted to a uniformly random
/// element of [n].
template <DomainSampler S>
CountHistogram sample_light_version(const S& sampler, const std::vector<bool>& heavy_mask,
                                    std::uint64_t m, Rng& rng) {
    const std::size_t n = sampler.domain_size();
    CountHistogram h(n, SamplingMode::Poissonized, m);
    const std::uint64_t draws = poisson_variate(static_cast<double>(m), rng);
    for (std::uint64_t k = 0; k < draws; ++k) {
        std::size_t i = sampler(rng);
        if (heavy_mask[i]) {
            i = static_cast<std::size_t>(rng.below(n));
        }
        h.add(i);
    }
    return h;
}

struct BoundednessCert {
    double b = 0;
    double C = 0;
    double l2_norm_sq = 0;
    bool passes = false;
};

/// (b, C)-boundedness: ||p||_2^2 <= C b.
BoundednessCert check_boundedness(const DiscreteDistribution& p, double b, double C);

struct FilteredParams {
    /// Step 1 draws kappa1 / (eps^2 b) samples per distribution.
    double kappa1 = 1.0;
    /// Step 2 draws kappa2 sqrt(2b) n / eps^2 samples per distribution.
    double kappa2 = 1.0;
    /// Heaviness threshold; defaults to n^{-2/3} when unset (<= 0).
    double b = 0.0;
};

/// Resolved sample sizes and thresholds of one composed run.
struct FilteredPlan {
    std::size_t n = 0;
    double eps = 0;
    double b = 0;
    std::uint64_t m1 = 0;
    std::uint64_t m2 = 0;
    double heavy_threshold = 0;  // eps / 2
    double light_eps = 0;        // eps / (2 sqrt(n))
};

/// Validates eps >= 1/sqrt(n) and resolves the plan.
FilteredPlan plan_filtered_test(std::size_t n, double eps, const FilteredParams& params);

/// Total per-distribution sample budget m1 + m2 of a plan.
inline std::uint64_t total_samples(const FilteredPlan& plan) { return plan.m1 + plan.m2; }

/// Sub-stream indices used by the composed test; Step 2 never shares a
/// stream with Step 1.
enum FilteredStream : std::uint64_t { kHeavyP = 0, kHeavyQ = 1, kLightP = 2, kLightQ = 3 };

struct HeavyStepResult {
    /// l1 distance of the empirical distributions over the heavy set.
    double heavy_distance = 0;
    std::vector<std::uint32_t> heavy_set;
    bool rejects = false;
};

/// Step 1 of the composed test: m1 Poissonized samples per distribution
/// on streams kHeavyP / kHeavyQ of `seed`, split at plan.b. An empty
/// sample yields an empty heavy set.
template <DomainSampler SP, DomainSampler SQ>
HeavyStepResult filtered_heavy_step(const SP& p_sampler, const SQ& q_sampler,
                                    const FilteredPlan& plan, std::uint64_t seed) {
    Rng rng_p = Rng::stream(seed, kHeavyP);
    Rng rng_q = Rng::stream(seed, kHeavyQ);
    CountHistogram x(plan.n, SamplingMode::Poissonized, plan.m1);
    CountHistogram y(plan.n, SamplingMode::Poissonized, plan.m1);
    sample_poissonized_from(p_sampler, plan.m1, rng_p, x);
    sample_poissonized_from(q_sampler, plan.m1, rng_q, y);
    HeavyStepResult step;
    if (x.total() == 0 || y.total() == 0) {
        return step;
    }
    EmpiricalSplit split = split_heavy_light(x, y, plan.b);
    step.heavy_distance = heavy_l1_estimate(split);
    step.heavy_set = std::move(split.heavy_set);
    step.rejects = step.heavy_distance > plan.heavy_threshold;
    return step;
}

/// Reduction-based l1 tester under sample access.
///
/// Step 1 estimates the l1 distance restricted to empirically heavy
/// elements and rejects when it exceeds eps/2. Step 2 runs the robust l2
/// test at eps/(2 sqrt(n)) on fresh samples of the light versions.
template <DomainSampler SP, DomainSampler SQ>
TestVerdict l1_filtered_test(const SP& p_sampler, const SQ& q_sampler, double eps,
                             const FilteredParams& params, std::uint64_t seed) {
    if (p_sampler.domain_size() != q_sampler.domain_size()) {
        throw std::invalid_argument("samplers have different domain sizes");
    }
    const FilteredPlan plan = plan_filtered_test(p_sampler.domain_size(), eps, params);
    const HeavyStepResult heavy = filtered_heavy_step(p_sampler, q_sampler, plan, seed);
    if (heavy.rejects) {
        TestVerdict verdict;
        verdict.decision = Decision::Different;
        verdict.statistic = heavy.heavy_distance;
        verdict.threshold = plan.heavy_threshold;
        verdict.m = plan.m1;
        verdict.stage = "heavy";
        return verdict;
    }
    const std::vector<bool> mask = index_mask(plan.n, heavy.heavy_set);
    Rng rng_p = Rng::stream(seed, kLightP);
    Rng rng_q = Rng::stream(seed, kLightQ);
    const CountHistogram x = sample_light_version(p_sampler, mask, plan.m2, rng_p);
    const CountHistogram y = sample_light_version(q_sampler, mask, plan.m2, rng_q);
    TestVerdict verdict = l2_robust_test(x, y, plan.light_eps);
    verdict.stage = "light";
    return verdict;
}

/// White-box variant with explicit distributions: Step 1 samples p and q
/// directly and Step 2 samples make_light_version(p), make_light_version(q).
/// Same law as the sampler form; used as an oracle in tests.
TestVerdict l1_filtered_test_explicit(const DiscreteDistribution& p, const DiscreteDistribution& q,
                                      double eps, const FilteredParams& params, std::uint64_t seed);

}  // namespace closeness
