#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "closeness/distribution.hpp"
#include "closeness/rng.hpp"

namespace closeness {

/// log(k!) accurate to a few ulps; table below 1024, Stirling series above.
double log_factorial(std::uint64_t k);

/// Exact Poisson(lambda) sampler with precomputed constants.
///
/// lambda < 10 uses sequential-search inversion; larger lambda uses
/// Hormann's transformed rejection with squeeze (PTRS, 1993), which is
/// exact: every proposal is accepted or rejected against the true pmf.
class PoissonSampler {
public:
    /// Throws std::invalid_argument for negative or non-finite lambda.
    explicit PoissonSampler(double lambda);

    std::uint64_t operator()(Rng& rng) const;

    double lambda() const { return lambda_; }

private:
    std::uint64_t inversion(Rng& rng) const;
    std::uint64_t ptrs(Rng& rng) const;

    double lambda_ = 0;
    double exp_neg_lambda_ = 1;
    // PTRS constants.
    double slam_ = 0, loglam_ = 0, b_ = 0, a_ = 0, inv_alpha_ = 0, vr_ = 0;
};

std::uint64_t poisson_variate(double lambda, Rng& rng);

/// Walker/Vose alias table: O(1) categorical draws from a distribution.
class AliasSampler {
public:
    explicit AliasSampler(const DiscreteDistribution& p);

    std::size_t domain_size() const { return prob_.size(); }

    std::uint32_t operator()(Rng& rng) const {
        const double x = rng.uniform() * static_cast<double>(prob_.size());
        auto i = static_cast<std::size_t>(x);
        if (i >= prob_.size()) i = prob_.size() - 1;
        return (x - static_cast<double>(i)) < prob_[i] ? static_cast<std::uint32_t>(i) : alias_[i];
    }

private:
    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
};

/// Sample access to a distribution over [n]: one draw per call.
template <typename S>
concept DomainSampler = requires(const S& s, Rng& rng) {
    { s.domain_size() } -> std::convertible_to<std::size_t>;
    { s(rng) } -> std::convertible_to<std::uint32_t>;
};

enum class SamplingMode { Fixed, Poissonized };

/// Per-element occurrence counts of one sample.
class CountHistogram {
public:
    CountHistogram() = default;
    CountHistogram(std::size_t n, SamplingMode mode, std::uint64_t m)
        : counts_(n, 0), mode_(mode), m_(m) {}
    /// Validates nothing beyond computing the total.
    CountHistogram(std::vector<std::uint64_t> counts, SamplingMode mode, std::uint64_t m);

    std::size_t size() const { return counts_.size(); }
    std::span<const std::uint64_t> counts() const { return counts_; }
    std::uint64_t operator[](std::size_t i) const { return counts_[i]; }
    std::uint64_t total() const { return total_; }
    SamplingMode mode() const { return mode_; }
    /// Nominal sample size (the Poisson mean under Poissonization).
    std::uint64_t m() const { return m_; }

    void add(std::size_t i, std::uint64_t c = 1) {
        counts_[i] += c;
        total_ += c;
    }
    /// Zeroes the counts and retargets the nominal size.
    void reset(std::uint64_t m);

    friend bool operator==(const CountHistogram&, const CountHistogram&) = default;

private:
    std::vector<std::uint64_t> counts_;
    std::uint64_t total_ = 0;
    SamplingMode mode_ = SamplingMode::Poissonized;
    std::uint64_t m_ = 0;
};

/// Counts X_i ~ Poi(m p_i), independent across i (one Poisson draw per
/// element).
CountHistogram sample_histogram_poissonized(const DiscreteDistribution& p, std::uint64_t m, Rng& rng);

/// Multinomial counts of exactly m independent draws from p.
CountHistogram sample_histogram_fixed(const DiscreteDistribution& p, std::uint64_t m, Rng& rng);

/// Poissonized sampling through sample access: draws N ~ Poi(m) and then
/// N samples, counting occurrences.
template <DomainSampler S>
void sample_poissonized_from(const S& sampler, std::uint64_t m, Rng& rng, CountHistogram& out) {
    out.reset(m);
    const std::uint64_t draws = poisson_variate(static_cast<double>(m), rng);
    for (std::uint64_t k = 0; k < draws; ++k) {
        out.add(sampler(rng));
    }
}

/// Repeated Poissonized histograms of one distribution at a fixed m.
///
/// Picks the cheaper of two samplers with the same law: per-element
/// Poisson draws (O(n)) or a Poi(m) total followed by alias draws
/// (O(m)). The choice depends only on (n, m), so output is a
/// deterministic function of the seed.
class PoissonizedHistogramSampler {
public:
    PoissonizedHistogramSampler(const DiscreteDistribution& p, std::uint64_t m);

    void operator()(Rng& rng, CountHistogram& out) const;
    CountHistogram operator()(Rng& rng) const;

    bool per_element() const { return per_element_; }
    std::size_t domain_size() const { return n_; }

private:
    std::size_t n_;
    std::uint64_t m_;
    bool per_element_;
    std::vector<PoissonSampler> elements_;
    std::vector<std::uint32_t> support_;
    AliasSampler alias_;
};

}  // namespace closeness
