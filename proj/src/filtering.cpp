#include "closeness/filtering.hpp"

#include <sstream>

#include "closeness/numeric.hpp"

namespace closeness {

EmpiricalSplit split_heavy_light(const CountHistogram& x, const CountHistogram& y, double b) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("dimension mismatch");
    }
    if (!(b > 0.0)) {
        throw std::invalid_argument("heaviness threshold b must be positive");
    }
    if (x.total() == 0 || y.total() == 0) {
        throw std::invalid_argument("cannot split an empty histogram");
    }
    EmpiricalSplit split;
    split.b = b;
    split.p_hat.resize(x.size());
    split.q_hat.resize(y.size());
    const double tx = static_cast<double>(x.total());
    const double ty = static_cast<double>(y.total());
    for (std::size_t i = 0; i < x.size(); ++i) {
        split.p_hat[i] = static_cast<double>(x[i]) / tx;
        split.q_hat[i] = static_cast<double>(y[i]) / ty;
        const auto idx = static_cast<std::uint32_t>(i);
        if (split.p_hat[i] >= b || split.q_hat[i] >= b) {
            split.heavy_set.push_back(idx);
        } else {
            split.light_set.push_back(idx);
        }
    }
    return split;
}

double heavy_l1_estimate(const EmpiricalSplit& split) {
    CompensatedSum total;
    for (auto i : split.heavy_set) {
        total.add(std::abs(split.p_hat[i] - split.q_hat[i]));
    }
    return total.value();
}

std::vector<bool> index_mask(std::size_t n, const std::vector<std::uint32_t>& indices) {
    std::vector<bool> mask(n, false);
    for (auto i : indices) {
        if (i >= n) {
            throw std::invalid_argument("index outside the domain");
        }
        mask[i] = true;
    }
    return mask;
}

DiscreteDistribution make_light_version(const DiscreteDistribution& p,
                                        const std::vector<std::uint32_t>& heavy_set) {
    const std::vector<bool> mask = index_mask(p.size(), heavy_set);
    CompensatedSum heavy_mass;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (mask[i]) heavy_mass.add(p[i]);
    }
    const double spread = heavy_mass.value() / static_cast<double>(p.size());
    std::vector<double> light(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        light[i] = (mask[i] ? 0.0 : p[i]) + spread;
    }
    return DiscreteDistribution::from_probs(std::move(light));
}

BoundednessCert check_boundedness(const DiscreteDistribution& p, double b, double C) {
    if (!(b > 0.0) || !(C > 0.0)) {
        throw std::invalid_argument("boundedness check requires b > 0 and C > 0");
    }
    BoundednessCert cert;
    cert.b = b;
    cert.C = C;
    cert.l2_norm_sq = l2_norm_sq(p);
    cert.passes = cert.l2_norm_sq <= C * b;
    return cert;
}

FilteredPlan plan_filtered_test(std::size_t n, double eps, const FilteredParams& params) {
    const double nd = static_cast<double>(n);
    if (!(eps > 0.0) || eps < 1.0 / std::sqrt(nd)) {
        std::ostringstream msg;
        msg << "filtered l1 test requires eps >= 1/sqrt(n) = " << 1.0 / std::sqrt(nd)
            << " (got eps = " << eps << ")";
        throw std::invalid_argument(msg.str());
    }
    if (!(params.kappa1 > 0.0) || !(params.kappa2 > 0.0)) {
        throw std::invalid_argument("filtered l1 test requires kappa1, kappa2 > 0");
    }
    FilteredPlan plan;
    plan.n = n;
    plan.eps = eps;
    plan.b = params.b > 0.0 ? params.b : std::pow(nd, -2.0 / 3.0);
    plan.m1 = static_cast<std::uint64_t>(std::ceil(params.kappa1 / (eps * eps * plan.b)));
    plan.m2 = static_cast<std::uint64_t>(
        std::ceil(params.kappa2 * std::sqrt(2.0 * plan.b) * nd / (eps * eps)));
    plan.heavy_threshold = eps / 2.0;
    plan.light_eps = eps / (2.0 * std::sqrt(nd));
    return plan;
}

TestVerdict l1_filtered_test_explicit(const DiscreteDistribution& p, const DiscreteDistribution& q,
                                      double eps, const FilteredParams& params, std::uint64_t seed) {
    if (p.size() != q.size()) {
        throw std::invalid_argument("dimension mismatch");
    }
    const FilteredPlan plan = plan_filtered_test(p.size(), eps, params);
    Rng rng_p1 = Rng::stream(seed, kHeavyP);
    Rng rng_q1 = Rng::stream(seed, kHeavyQ);
    const CountHistogram x1 = sample_histogram_poissonized(p, plan.m1, rng_p1);
    const CountHistogram y1 = sample_histogram_poissonized(q, plan.m1, rng_q1);

    std::vector<std::uint32_t> heavy;
    if (x1.total() > 0 && y1.total() > 0) {
        EmpiricalSplit split = split_heavy_light(x1, y1, plan.b);
        const double heavy_distance = heavy_l1_estimate(split);
        if (heavy_distance > plan.heavy_threshold) {
            TestVerdict v;
            v.decision = Decision::Different;
            v.statistic = heavy_distance;
            v.threshold = plan.heavy_threshold;
            v.m = plan.m1;
            v.stage = "heavy";
            return v;
        }
        heavy = std::move(split.heavy_set);
    }
    Rng rng_p2 = Rng::stream(seed, kLightP);
    Rng rng_q2 = Rng::stream(seed, kLightQ);
    const CountHistogram x2 =
        sample_histogram_poissonized(make_light_version(p, heavy), plan.m2, rng_p2);
    const CountHistogram y2 =
        sample_histogram_poissonized(make_light_version(q, heavy), plan.m2, rng_q2);
    TestVerdict v = l2_robust_test(x2, y2, plan.light_eps);
    v.stage = "light";
    return v;
}

}  // namespace closeness
