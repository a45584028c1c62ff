#include "closeness/sampling.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace closeness {

namespace {

constexpr std::size_t kLogFactorialTable = 1024;
constexpr double kInversionCutoff = 10.0;

const std::array<double, kLogFactorialTable>& log_factorial_table() {
    static const auto table = [] {
        std::array<double, kLogFactorialTable> t{};
        long double acc = 0.0L;
        t[0] = 0.0;
        for (std::size_t k = 1; k < kLogFactorialTable; ++k) {
            acc += std::log(static_cast<long double>(k));
            t[k] = static_cast<double>(acc);
        }
        return t;
    }();
    return table;
}

}  // namespace

double log_factorial(std::uint64_t k) {
    if (k < kLogFactorialTable) {
        return log_factorial_table()[k];
    }
    const double x = static_cast<double>(k);
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    return x * std::log(x) - x + 0.5 * std::log(2.0 * std::numbers::pi * x) +
           inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0));
}

// ---------------------------------------------------------------------------

PoissonSampler::PoissonSampler(double lambda) : lambda_(lambda) {
    if (!std::isfinite(lambda) || lambda < 0.0) {
        throw std::invalid_argument("Poisson rate must be finite and non-negative");
    }
    if (lambda < kInversionCutoff) {
        exp_neg_lambda_ = std::exp(-lambda);
        return;
    }
    slam_ = std::sqrt(lambda);
    loglam_ = std::log(lambda);
    b_ = 0.931 + 2.53 * slam_;
    a_ = -0.059 + 0.02483 * b_;
    inv_alpha_ = 1.1239 + 1.1328 / (b_ - 3.4);
    vr_ = 0.9277 - 3.6224 / (b_ - 2.0);
}

std::uint64_t PoissonSampler::operator()(Rng& rng) const {
    if (lambda_ == 0.0) return 0;
    return lambda_ < kInversionCutoff ? inversion(rng) : ptrs(rng);
}

std::uint64_t PoissonSampler::inversion(Rng& rng) const {
    const double u = rng.uniform();
    std::uint64_t k = 0;
    double pmf = exp_neg_lambda_;
    double cdf = pmf;
    while (u >= cdf) {
        ++k;
        pmf *= lambda_ / static_cast<double>(k);
        const double next = cdf + pmf;
        // Rounding can leave cdf a hair below 1 with u beyond it.
        if (next == cdf) break;
        cdf = next;
    }
    return k;
}

std::uint64_t PoissonSampler::ptrs(Rng& rng) const {
    for (;;) {
        const double u = rng.uniform() - 0.5;
        const double v = rng.uniform();
        const double us = 0.5 - std::abs(u);
        const double kd = std::floor((2.0 * a_ / us + b_) * u + lambda_ + 0.43);
        if (us >= 0.07 && v <= vr_) {
            return static_cast<std::uint64_t>(kd);
        }
        if (kd < 0.0 || (us < 0.013 && v > us)) {
            continue;
        }
        const auto k = static_cast<std::uint64_t>(kd);
        if (std::log(v) + std::log(inv_alpha_) - std::log(a_ / (us * us) + b_) <=
            -lambda_ + kd * loglam_ - log_factorial(k)) {
            return k;
        }
    }
}

std::uint64_t poisson_variate(double lambda, Rng& rng) { return PoissonSampler(lambda)(rng); }

// ---------------------------------------------------------------------------

AliasSampler::AliasSampler(const DiscreteDistribution& p) : prob_(p.size()), alias_(p.size()) {
    const std::size_t n = p.size();
    if (n > std::numeric_limits<std::uint32_t>::max()) {
        throw std::invalid_argument("alias table supports at most 2^32 - 1 elements");
    }
    std::vector<double> scaled(n);
    std::vector<std::uint32_t> small;
    std::vector<std::uint32_t> large;
    for (std::size_t i = 0; i < n; ++i) {
        scaled[i] = p[i] * static_cast<double>(n);
        (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
        const auto s = small.back();
        small.pop_back();
        const auto l = large.back();
        prob_[s] = scaled[s];
        alias_[s] = l;
        scaled[l] = (scaled[l] + scaled[s]) - 1.0;
        if (scaled[l] < 1.0) {
            large.pop_back();
            small.push_back(l);
        }
    }
    for (auto i : large) {
        prob_[i] = 1.0;
        alias_[i] = i;
    }
    // Leftovers are numerically ~1.
    for (auto i : small) {
        prob_[i] = 1.0;
        alias_[i] = i;
    }
}

// ---------------------------------------------------------------------------

CountHistogram::CountHistogram(std::vector<std::uint64_t> counts, SamplingMode mode, std::uint64_t m)
    : counts_(std::move(counts)), mode_(mode), m_(m) {
    for (auto c : counts_) total_ += c;
}

void CountHistogram::reset(std::uint64_t m) {
    std::fill(counts_.begin(), counts_.end(), 0);
    total_ = 0;
    m_ = m;
}

CountHistogram sample_histogram_poissonized(const DiscreteDistribution& p, std::uint64_t m, Rng& rng) {
    CountHistogram h(p.size(), SamplingMode::Poissonized, m);
    const double md = static_cast<double>(m);
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) {
            h.add(i, poisson_variate(md * p[i], rng));
        }
    }
    return h;
}

CountHistogram sample_histogram_fixed(const DiscreteDistribution& p, std::uint64_t m, Rng& rng) {
    CountHistogram h(p.size(), SamplingMode::Fixed, m);
    if (m == 0) return h;
    const AliasSampler alias(p);
    for (std::uint64_t k = 0; k < m; ++k) {
        h.add(alias(rng));
    }
    return h;
}

// ---------------------------------------------------------------------------

PoissonizedHistogramSampler::PoissonizedHistogramSampler(const DiscreteDistribution& p, std::uint64_t m)
    : n_(p.size()), m_(m), alias_(p) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) support_.push_back(static_cast<std::uint32_t>(i));
    }
    // An alias draw costs about a third of a small-rate Poisson draw.
    per_element_ = 3 * support_.size() <= m;
    if (per_element_) {
        elements_.reserve(support_.size());
        const double md = static_cast<double>(m);
        for (auto i : support_) {
            elements_.emplace_back(md * p[i]);
        }
    }
}

void PoissonizedHistogramSampler::operator()(Rng& rng, CountHistogram& out) const {
    if (out.size() != n_ || out.mode() != SamplingMode::Poissonized) {
        out = CountHistogram(n_, SamplingMode::Poissonized, m_);
    } else {
        out.reset(m_);
    }
    if (per_element_) {
        for (std::size_t k = 0; k < support_.size(); ++k) {
            out.add(support_[k], elements_[k](rng));
        }
        return;
    }
    const std::uint64_t draws = poisson_variate(static_cast<double>(m_), rng);
    for (std::uint64_t k = 0; k < draws; ++k) {
        out.add(alias_(rng));
    }
}

CountHistogram PoissonizedHistogramSampler::operator()(Rng& rng) const {
    CountHistogram out(n_, SamplingMode::Poissonized, m_);
    (*this)(rng, out);
    return out;
}

}  // namespace closeness
