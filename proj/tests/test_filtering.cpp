#include <gtest/gtest.h>

#include <set>

#include "closeness/distribution.hpp"
#include "closeness/filtering.hpp"

using namespace closeness;

namespace {

CountHistogram hist(std::vector<std::uint64_t> counts) {
    return CountHistogram(std::move(counts), SamplingMode::Poissonized, 0);
}

/// Alias sampler that logs, per draw, the next raw output of the generator
/// it was handed; equal log entries mean the same generator state.
class SpySampler {
public:
    explicit SpySampler(const DiscreteDistribution& p) : alias_(p) {}
    std::size_t domain_size() const { return alias_.domain_size(); }
    std::uint32_t operator()(Rng& rng) const {
        Rng probe = rng;
        log_.push_back(probe());
        return alias_(rng);
    }
    mutable std::vector<std::uint64_t> log_;

private:
    AliasSampler alias_;
};

}  // namespace

TEST(Split, Examples) {
    const auto s = split_heavy_light(hist({5, 5}), hist({5, 5}), 0.5);
    EXPECT_EQ(s.heavy_set, (std::vector<std::uint32_t>{0, 1}));
    EXPECT_TRUE(s.light_set.empty());
    EXPECT_TRUE(split_heavy_light(hist({5, 5}), hist({3, 7}), 1.1).heavy_set.empty());
    const auto tiny = split_heavy_light(hist({1, 0, 0, 2}), hist({0, 0, 1, 0}), 1e-12);
    EXPECT_EQ(tiny.heavy_set, (std::vector<std::uint32_t>{0, 2, 3}));
    EXPECT_EQ(tiny.light_set, (std::vector<std::uint32_t>{1}));
    EXPECT_THROW(split_heavy_light(hist({0, 0}), hist({1, 0}), 0.1), std::invalid_argument);
    EXPECT_THROW(split_heavy_light(hist({1, 0}), hist({1, 0}), 0.0), std::invalid_argument);
}

TEST(Split, PartitionsAndHeavyMeetThreshold) {
    Rng rng(3);
    const auto p = gen_random_simplex(200, 1), q = gen_random_simplex(200, 2);
    for (int r = 0; r < 50; ++r) {
        const auto s = split_heavy_light(sample_histogram_poissonized(p, 300, rng),
                                         sample_histogram_poissonized(q, 300, rng), 0.01);
        EXPECT_EQ(s.heavy_set.size() + s.light_set.size(), 200u);
        std::set<std::uint32_t> all(s.heavy_set.begin(), s.heavy_set.end());
        all.insert(s.light_set.begin(), s.light_set.end());
        EXPECT_EQ(all.size(), 200u);
        for (auto i : s.heavy_set) EXPECT_TRUE(s.p_hat[i] >= 0.01 || s.q_hat[i] >= 0.01);
    }
}

TEST(HeavyEstimate, Basics) {
    EXPECT_EQ(heavy_l1_estimate(split_heavy_light(hist({5, 5}), hist({5, 5}), 0.1)), 0.0);
    EXPECT_EQ(heavy_l1_estimate(split_heavy_light(hist({5, 5}), hist({2, 8}), 0.9)), 0.0);
    EXPECT_DOUBLE_EQ(heavy_l1_estimate(split_heavy_light(hist({5, 5}), hist({2, 8}), 0.1)), 0.6);
}

TEST(HeavyEstimate, AccurateWithEnoughSamples) {
    // m = 16 / (eps^2 b delta) samples per side at (n=1000, b=0.01, eps=0.2, delta=0.2).
    const double b = 0.01, eps = 0.2, delta = 0.2;
    const auto m = static_cast<std::uint64_t>(16 / (eps * eps * b * delta));
    const auto p = gen_random_simplex(1000, 5), q = gen_random_simplex(1000, 6);
    int good = 0;
    for (std::uint64_t t = 0; t < 500; ++t) {
        Rng rng = Rng::stream(11, t);
        const auto s = split_heavy_light(sample_histogram_poissonized(p, m, rng),
                                         sample_histogram_poissonized(q, m, rng), b);
        double truth = 0;
        for (auto i : s.heavy_set) truth += std::abs(p[i] - q[i]);
        if (std::abs(heavy_l1_estimate(s) - truth) <= eps) ++good;
    }
    EXPECT_GE(good, static_cast<int>((1 - delta) * 500));
}

TEST(LightVersion, Examples) {
    const auto p = DiscreteDistribution::from_probs({0.6, 0.2, 0.2});
    EXPECT_EQ(make_light_version(p, {}), p);
    const auto all = make_light_version(p, {0, 1, 2});
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(all[i], 1.0 / 3, 1e-15);
    const auto light = make_light_version(p, {0});
    EXPECT_NEAR(light[0], 0.2, 1e-15);
    EXPECT_NEAR(light[1], 0.4, 1e-15);
    EXPECT_NEAR(light[2], 0.4, 1e-15);
}

TEST(LightVersion, ValidAndPointwiseBounded) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto p = gen_random_simplex(64, seed);
        Rng rng(seed);
        std::vector<std::uint32_t> heavy;
        for (std::uint32_t i = 0; i < 64; ++i) {
            if (rng.coin()) heavy.push_back(i);
        }
        const auto light = make_light_version(p, heavy);
        const auto mask = index_mask(64, heavy);
        for (std::size_t i = 0; i < 64; ++i) {
            EXPECT_GE(light[i], 0.0);
            const double bound = mask[i] ? 1.0 / 64 : p[i] + 1.0 / 64;
            EXPECT_LE(light[i], bound + 1e-15);
        }
    }
}

TEST(LightVersion, SampledLawMatchesConstruction) {
    const auto p = DiscreteDistribution::from_probs({0.4, 0.3, 0.2, 0.1});
    const std::vector<std::uint32_t> heavy{0, 2};
    const auto target = make_light_version(p, heavy);
    const auto mask = index_mask(4, heavy);
    const AliasSampler sampler(p);
    const std::uint64_t m = 50;
    std::vector<double> sums(4, 0.0);
    const int reps = 10000;
    for (int r = 0; r < reps; ++r) {
        Rng rng = Rng::stream(31, r);
        const auto h = sample_light_version(sampler, mask, m, rng);
        for (std::size_t i = 0; i < 4; ++i) sums[i] += static_cast<double>(h[i]);
    }
    for (std::size_t i = 0; i < 4; ++i) {
        const double lambda = m * target[i];
        EXPECT_NEAR(sums[i] / reps, lambda, 5 * std::sqrt(lambda / reps));
    }
}

TEST(Boundedness, Examples) {
    EXPECT_TRUE(check_boundedness(DiscreteDistribution::uniform(50), 1.0 / 50, 1.0).passes);
    std::vector<double> point(50, 0.0);
    point[3] = 1.0;
    const auto cert = check_boundedness(DiscreteDistribution::from_probs(point), 1.0 / 50, 1.0);
    EXPECT_FALSE(cert.passes);
    EXPECT_EQ(cert.l2_norm_sq, 1.0);
}

TEST(Boundedness, LightVersionsAreTypicallyBounded) {
    // (2b, 10/delta) with delta = 0.1 on the two-bump pair, heavy set from m = 1/b samples.
    const std::size_t n = 4096;
    const double b = std::pow(static_cast<double>(n), -2.0 / 3.0);
    const auto pair = gen_two_bump_l1(n, 0.5);
    const auto m = static_cast<std::uint64_t>(std::ceil(1 / b));
    int passes = 0;
    double worst = 0;
    for (std::uint64_t t = 0; t < 500; ++t) {
        Rng rng = Rng::stream(41, t);
        const auto s = split_heavy_light(sample_histogram_poissonized(pair.p, m, rng),
                                         sample_histogram_poissonized(pair.q, m, rng), b);
        const auto light = make_light_version(pair.p, s.heavy_set);
        const auto cert = check_boundedness(light, 2 * b, 100.0);
        passes += cert.passes ? 1 : 0;
        worst = std::max(worst, cert.l2_norm_sq / b);
    }
    RecordProperty("worst_norm_ratio", std::to_string(worst));
    EXPECT_GE(passes, 450);
}

TEST(Filtered, Preconditions) {
    EXPECT_THROW(plan_filtered_test(100, 0.001, {}), std::invalid_argument);
    FilteredParams bad;
    bad.kappa1 = 0;
    EXPECT_THROW(plan_filtered_test(100, 0.5, bad), std::invalid_argument);
    const auto plan = plan_filtered_test(1000, 0.5, {});
    EXPECT_NEAR(plan.b, 0.01, 1e-15);
    EXPECT_EQ(plan.m1, 400u);
    EXPECT_EQ(plan.m2, static_cast<std::uint64_t>(std::ceil(std::sqrt(0.02) * 1000 / 0.25)));
    EXPECT_DOUBLE_EQ(plan.heavy_threshold, 0.25);
    EXPECT_DOUBLE_EQ(plan.light_eps, 0.5 / (2 * std::sqrt(1000.0)));
    const AliasSampler a(DiscreteDistribution::uniform(10)), b(DiscreteDistribution::uniform(11));
    EXPECT_THROW(l1_filtered_test(a, b, 0.5, {}, 1), std::invalid_argument);
}

TEST(Filtered, StepTwoDrawsFreshSamplesOnItsOwnStreams) {
    const auto pair = gen_two_bump_l1(4096, 0.5);
    FilteredParams params;
    params.kappa1 = 3;  // large enough that p = q rarely stops at Step 1
    params.kappa2 = 0.5;
    const auto plan = plan_filtered_test(4096, 0.5, params);
    int light_runs = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SpySampler sp(pair.p), sq(pair.p);
        const auto v = l1_filtered_test(sp, sq, 0.5, params, seed);
        ASSERT_TRUE(v.stage.has_value());
        if (*v.stage != "light") continue;
        ++light_runs;

        // Step 1 alone, replayed with the same seed.
        SpySampler hp(pair.p), hq(pair.p);
        const auto heavy = filtered_heavy_step(hp, hq, plan, seed);
        ASSERT_FALSE(heavy.rejects);

        // Step 2 alone, replayed on the light streams.
        const auto mask = index_mask(4096, heavy.heavy_set);
        SpySampler lp(pair.p), lq(pair.p);
        Rng rp = Rng::stream(seed, kLightP), rq = Rng::stream(seed, kLightQ);
        (void)sample_light_version(lp, mask, plan.m2, rp);
        (void)sample_light_version(lq, mask, plan.m2, rq);

        for (const auto* spy : {&sp, &sq}) {
            const auto& step1 = spy == &sp ? hp.log_ : hq.log_;
            const auto& step2 = spy == &sp ? lp.log_ : lq.log_;
            ASSERT_EQ(spy->log_.size(), step1.size() + step2.size());
            EXPECT_TRUE(std::equal(step1.begin(), step1.end(), spy->log_.begin()));
            EXPECT_TRUE(std::equal(step2.begin(), step2.end(), spy->log_.begin() + step1.size()));
            // No generator state used in Step 1 reappears in Step 2.
            const std::set<std::uint64_t> seen(step1.begin(), step1.end());
            for (auto s : step2) EXPECT_EQ(seen.count(s), 0u);
        }
    }
    EXPECT_GT(light_runs, 10);
}

TEST(Filtered, SamplerAndExplicitFormsShareTheLaw) {
    const auto pair = gen_two_bump_l1(4096, 0.5);
    FilteredParams params;
    params.kappa1 = 0.7;
    params.kappa2 = 0.7;
    const AliasSampler ap(pair.p), aq(pair.q);
    const int trials = 400;
    int null_rej = 0, alt_acc = 0, null_rej_x = 0, alt_acc_x = 0;
    for (std::uint64_t seed = 0; seed < trials; ++seed) {
        null_rej += l1_filtered_test(ap, ap, 0.5, params, seed).decision == Decision::Different;
        alt_acc += l1_filtered_test(ap, aq, 0.5, params, seed).decision == Decision::Equal;
        null_rej_x += l1_filtered_test_explicit(pair.p, pair.p, 0.5, params, 10000 + seed).decision == Decision::Different;
        alt_acc_x += l1_filtered_test_explicit(pair.p, pair.q, 0.5, params, 10000 + seed).decision == Decision::Equal;
    }
    // Two independent binomial rates with the same mean differ by under 4 sd.
    auto close = [&](int a, int b) {
        const double r = (a + b) / (2.0 * trials);
        return std::abs(a - b) / static_cast<double>(trials) <= 4 * std::sqrt(2 * r * (1 - r) / trials) + 1e-12;
    };
    EXPECT_TRUE(close(null_rej, null_rej_x)) << null_rej << " vs " << null_rej_x;
    EXPECT_TRUE(close(alt_acc, alt_acc_x)) << alt_acc << " vs " << alt_acc_x;
}
