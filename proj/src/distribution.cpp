#include "closeness/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "closeness/numeric.hpp"
#include "closeness/rng.hpp"

namespace closeness {

namespace {

void require_same_size(const DiscreteDistribution& p, const DiscreteDistribution& q) {
    if (p.size() != q.size()) {
        std::ostringstream msg;
        msg << "dimension mismatch: " << p.size() << " vs " << q.size();
        throw std::invalid_argument(msg.str());
    }
}

template <typename Fn>
double sum_over_difference(const DiscreteDistribution& p, const DiscreteDistribution& q, Fn fn) {
    require_same_size(p, q);
    std::vector<double> terms(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        terms[i] = fn(std::abs(p[i] - q[i]));
    }
    return compensated_sum(terms);
}

}  // namespace

double compensated_sum(std::span<const double> values) {
    CompensatedSum sum;
    for (double v : values) sum.add(v);
    return sum.value();
}

DiscreteDistribution DiscreteDistribution::from_probs(std::vector<double> probs) {
    if (probs.empty()) {
        throw std::invalid_argument("distribution needs at least one element");
    }
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (!std::isfinite(probs[i]) || probs[i] < 0.0) {
            std::ostringstream msg;
            msg << "probability at index " << i << " is " << probs[i];
            throw std::invalid_argument(msg.str());
        }
    }
    const double total = compensated_sum(probs);
    if (std::abs(total - 1.0) > kProbabilityTolerance) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "probabilities sum to " << total << ", not 1";
        throw std::invalid_argument(msg.str());
    }
    return DiscreteDistribution(std::move(probs));
}

DiscreteDistribution DiscreteDistribution::normalized(std::vector<double> weights) {
    if (weights.empty()) {
        throw std::invalid_argument("distribution needs at least one element");
    }
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0) {
            throw std::invalid_argument("weights must be finite and non-negative");
        }
    }
    const double total = compensated_sum(weights);
    if (!(total > 0.0)) {
        throw std::invalid_argument("weights sum to zero");
    }
    for (double& w : weights) {
        w /= total;
    }
    return from_probs(std::move(weights));
}

DiscreteDistribution DiscreteDistribution::uniform(std::size_t n) {
    if (n == 0) {
        throw std::invalid_argument("uniform distribution needs n >= 1");
    }
    return DiscreteDistribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

double l1_distance(const DiscreteDistribution& p, const DiscreteDistribution& q) {
    return sum_over_difference(p, q, [](double d) { return d; });
}

double l2_distance(const DiscreteDistribution& p, const DiscreteDistribution& q) {
    return std::sqrt(sum_over_difference(p, q, [](double d) { return d * d; }));
}

double l4_distance(const DiscreteDistribution& p, const DiscreteDistribution& q) {
    return std::sqrt(std::sqrt(sum_over_difference(p, q, [](double d) { return (d * d) * (d * d); })));
}

double linf_distance(const DiscreteDistribution& p, const DiscreteDistribution& q) {
    require_same_size(p, q);
    double best = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        best = std::max(best, std::abs(p[i] - q[i]));
    }
    return best;
}

double linf_norm(const DiscreteDistribution& p) {
    return *std::max_element(p.probs().begin(), p.probs().end());
}

double l2_norm_sq(const DiscreteDistribution& p) {
    std::vector<double> squares(p.size());
    std::transform(p.probs().begin(), p.probs().end(), squares.begin(),
                   [](double v) { return v * v; });
    return compensated_sum(squares);
}

// ---------------------------------------------------------------------------

double two_bump_min_eps(std::size_t n) {
    return std::pow(4.0, 0.75) * std::pow(static_cast<double>(n), -0.25);
}

TwoBumpPair gen_two_bump_l1(std::size_t n, double eps, TwoBumpOptions options) {
    if (n < 16) {
        throw std::invalid_argument("two-bump instance requires n >= 16");
    }
    if (!(eps > 0.0 && eps < 1.0)) {
        throw std::invalid_argument("two-bump instance requires eps in (0, 1)");
    }
    if (options.enforce_regime && eps < two_bump_min_eps(n)) {
        std::ostringstream msg;
        msg << "two-bump instance requires eps >= 4^{3/4} n^{-1/4} = " << two_bump_min_eps(n)
            << " (got eps = " << eps << ", n = " << n << ")";
        throw std::invalid_argument(msg.str());
    }
    const double nd = static_cast<double>(n);
    TwoBumpLayout layout;
    layout.b = std::pow(eps, 4.0 / 3.0) / std::pow(nd, 2.0 / 3.0);
    layout.a = 4.0 / nd;
    layout.size_a = static_cast<std::size_t>(std::floor((1.0 - eps) / layout.b));
    layout.size_b = n / 4;
    if (layout.size_a == 0) {
        throw std::invalid_argument("two-bump instance: block A is empty");
    }
    if (layout.size_a + 2 * layout.size_b > n) {
        throw std::invalid_argument("two-bump instance: blocks A, B, C do not fit in [n]");
    }

    const double bump = eps * layout.a;
    const double bump_mass = static_cast<double>(layout.size_b) * bump;
    const double heavy = (1.0 - bump_mass) / static_cast<double>(layout.size_a);

    std::vector<double> p(n, 0.0);
    std::vector<double> q(n, 0.0);
    std::fill_n(p.begin(), layout.size_a, heavy);
    std::fill_n(q.begin(), layout.size_a, heavy);
    std::fill_n(p.begin() + static_cast<std::ptrdiff_t>(layout.size_a), layout.size_b, bump);
    std::fill_n(q.begin() + static_cast<std::ptrdiff_t>(layout.size_a + layout.size_b),
                layout.size_b, bump);
    return {DiscreteDistribution::from_probs(std::move(p)),
            DiscreteDistribution::from_probs(std::move(q)), layout};
}

PerturbedPair gen_perturbed_uniform_l2(double b, double eps, std::uint64_t seed) {
    if (!(b > 0.0 && b <= 1.0)) {
        throw std::invalid_argument("perturbed-uniform instance requires b in (0, 1]");
    }
    const double inverse = std::round(1.0 / b);
    if (inverse < 1.0 || std::abs(inverse * b - 1.0) > 1e-9) {
        std::ostringstream msg;
        msg << "perturbed-uniform instance requires 1/b to be a positive integer (1/b = " << 1.0 / b
            << ")";
        throw std::invalid_argument(msg.str());
    }
    if (!(eps >= 0.0) || eps > std::sqrt(b)) {
        throw std::invalid_argument("perturbed-uniform instance requires 0 <= eps <= sqrt(b)");
    }
    const auto n = static_cast<std::size_t>(inverse);
    const double mass = 1.0 / inverse;
    const double step = eps * std::sqrt(b);

    Rng rng(seed);
    std::vector<double> perturbation(n);
    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) {
        perturbation[i] = rng.coin() ? step : -step;
        q[i] = mass + perturbation[i];
    }
    auto p = DiscreteDistribution::uniform(n);
    if (eps == 0.0) {
        return {p, p, std::move(perturbation)};
    }
    return {std::move(p), DiscreteDistribution::normalized(std::move(q)), std::move(perturbation)};
}

DiscreteDistribution gen_random_simplex(std::size_t n, std::uint64_t seed) {
    if (n == 0) {
        throw std::invalid_argument("random simplex requires n >= 1");
    }
    Rng rng(seed);
    std::vector<double> weights(n);
    for (double& w : weights) {
        w = rng.exponential();
    }
    return DiscreteDistribution::normalized(std::move(weights));
}

// ---------------------------------------------------------------------------

namespace {

struct Validate {
    void operator()(const family::Uniform& f) const {
        if (f.n == 0) throw std::invalid_argument("uniform family requires n >= 1");
    }
    void operator()(const family::TwoBumpL1& f) const {
        gen_two_bump_l1(f.n, f.eps, {f.enforce_regime});
    }
    void operator()(const family::PerturbedUniformL2& f) const {
        gen_perturbed_uniform_l2(f.b, f.eps, f.seed);
    }
    void operator()(const family::RandomSimplex& f) const {
        if (f.n == 0) throw std::invalid_argument("random simplex family requires n >= 1");
    }
    void operator()(const family::Explicit& f) const {
        DiscreteDistribution::from_probs(f.p);
        DiscreteDistribution::from_probs(f.q);
        if (f.p.size() != f.q.size()) {
            throw std::invalid_argument("explicit family: p and q differ in size");
        }
    }
};

struct Materialize {
    std::pair<DiscreteDistribution, DiscreteDistribution> operator()(const family::Uniform& f) const {
        auto u = DiscreteDistribution::uniform(f.n);
        return {u, u};
    }
    std::pair<DiscreteDistribution, DiscreteDistribution> operator()(const family::TwoBumpL1& f) const {
        auto pair = gen_two_bump_l1(f.n, f.eps, {f.enforce_regime});
        return {std::move(pair.p), std::move(pair.q)};
    }
    std::pair<DiscreteDistribution, DiscreteDistribution> operator()(
        const family::PerturbedUniformL2& f) const {
        auto pair = gen_perturbed_uniform_l2(f.b, f.eps, f.seed);
        return {std::move(pair.p), std::move(pair.q)};
    }
    std::pair<DiscreteDistribution, DiscreteDistribution> operator()(const family::RandomSimplex& f) const {
        return {gen_random_simplex(f.n, f.seed),
                gen_random_simplex(f.n, Rng::derive_seed(f.seed, 1))};
    }
    std::pair<DiscreteDistribution, DiscreteDistribution> operator()(const family::Explicit& f) const {
        return {DiscreteDistribution::from_probs(f.p), DiscreteDistribution::from_probs(f.q)};
    }
};

}  // namespace

InstanceSpec::InstanceSpec(Family family, InstanceRole role) : family_(std::move(family)), role_(role) {
    std::visit(Validate{}, family_);
}

std::pair<DiscreteDistribution, DiscreteDistribution> InstanceSpec::materialize() const {
    auto pq = std::visit(Materialize{}, family_);
    if (role_ == InstanceRole::Null) {
        pq.second = pq.first;
    }
    return pq;
}

std::size_t InstanceSpec::domain_size() const {
    return std::visit(
        [](const auto& f) -> std::size_t {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, family::PerturbedUniformL2>) {
                return static_cast<std::size_t>(std::round(1.0 / f.b));
            } else if constexpr (std::is_same_v<T, family::Explicit>) {
                return f.p.size();
            } else {
                return f.n;
            }
        },
        family_);
}

std::string InstanceSpec::name() const {
    return std::visit(
        [](const auto& f) -> std::string {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, family::Uniform>) return "uniform";
            if constexpr (std::is_same_v<T, family::TwoBumpL1>) return "two-bump";
            if constexpr (std::is_same_v<T, family::PerturbedUniformL2>) return "perturbed-l2";
            if constexpr (std::is_same_v<T, family::RandomSimplex>) return "simplex";
            if constexpr (std::is_same_v<T, family::Explicit>) return "explicit";
        },
        family_);
}

}  // namespace closeness
