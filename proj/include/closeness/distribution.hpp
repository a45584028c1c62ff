#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace closeness {

/// Absolute tolerance on the total mass of a distribution.
inline constexpr double kProbabilityTolerance = 1e-12;

/// A probability vector over the domain [n] = {0, ..., n-1}.
///
/// Immutable once built: entries are non-negative and sum to 1 within
/// kProbabilityTolerance.
class DiscreteDistribution {
public:
    /// Validates `probs` as-is. Throws std::invalid_argument on negative or
    /// non-finite entries, an empty vector, or a total off by more than the
    /// tolerance.
    static DiscreteDistribution from_probs(std::vector<double> probs);

    /// Divides non-negative `weights` by their sum.
    static DiscreteDistribution normalized(std::vector<double> weights);

    static DiscreteDistribution uniform(std::size_t n);

    std::size_t size() const { return probs_.size(); }
    std::span<const double> probs() const { return probs_; }
    double operator[](std::size_t i) const { return probs_[i]; }

    friend bool operator==(const DiscreteDistribution&, const DiscreteDistribution&) = default;

private:
    explicit DiscreteDistribution(std::vector<double> probs) : probs_(std::move(probs)) {}

    std::vector<double> probs_;
};

/// Neumaier-compensated sum.
double compensated_sum(std::span<const double> values);

double l1_distance(const DiscreteDistribution& p, const DiscreteDistribution& q);
double l2_distance(const DiscreteDistribution& p, const DiscreteDistribution& q);
double l4_distance(const DiscreteDistribution& p, const DiscreteDistribution& q);
double linf_distance(const DiscreteDistribution& p, const DiscreteDistribution& q);
double linf_norm(const DiscreteDistribution& p);
double l2_norm_sq(const DiscreteDistribution& p);

// ---------------------------------------------------------------------------
// Instance generators
// ---------------------------------------------------------------------------

struct TwoBumpLayout {
    double b = 0;            // per-element mass on A before renormalization
    double a = 0;            // 4/n; elements of B and C carry eps*a
    std::size_t size_a = 0;  // |A|, occupying [0, |A|)
    std::size_t size_b = 0;  // |B| = |C|; B is [|A|, |A|+|B|), C follows
};

struct TwoBumpPair {
    DiscreteDistribution p;
    DiscreteDistribution q;
    TwoBumpLayout layout;
};

struct TwoBumpOptions {
    /// Enforce eps >= 4^{3/4} n^{-1/4}, the regime in which the heavy bump
    /// mass b is at least the light bump mass a. When disabled the pair is
    /// still built as long as A, B and C fit inside [n].
    bool enforce_regime = true;
};

/// The two-bump l1 pair: both share a heavy block A of mass 1-eps; p puts
/// its remaining eps on block B, q on the disjoint block C.
TwoBumpPair gen_two_bump_l1(std::size_t n, double eps, TwoBumpOptions options = {});

/// Smallest eps accepted by gen_two_bump_l1 in enforced mode.
double two_bump_min_eps(std::size_t n);

struct PerturbedPair {
    DiscreteDistribution p;
    DiscreteDistribution q;
    /// q_i - p_i before q is renormalized.
    std::vector<double> perturbation;
};

/// p uniform with mass b on 1/b elements; q_i = p_i +/- eps*sqrt(b) with
/// independent fair signs, then divided by its realized sum.
PerturbedPair gen_perturbed_uniform_l2(double b, double eps, std::uint64_t seed);

/// Normalized vector of n standard exponential variates.
DiscreteDistribution gen_random_simplex(std::size_t n, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Instance families
// ---------------------------------------------------------------------------

namespace family {
struct Uniform {
    std::size_t n;
};
struct TwoBumpL1 {
    std::size_t n;
    double eps;
    bool enforce_regime = true;
};
struct PerturbedUniformL2 {
    double b;
    double eps;
    std::uint64_t seed;
};
struct RandomSimplex {
    std::size_t n;
    std::uint64_t seed;
};
struct Explicit {
    std::vector<double> p;
    std::vector<double> q;
};
}  // namespace family

enum class InstanceRole { Null, Alternative };

/// A parameterized instance family plus the hypothesis to realize.
/// Construction validates the family parameters.
class InstanceSpec {
public:
    using Family = std::variant<family::Uniform, family::TwoBumpL1, family::PerturbedUniformL2,
                                family::RandomSimplex, family::Explicit>;

    explicit InstanceSpec(Family family, InstanceRole role = InstanceRole::Alternative);

    const Family& family() const { return family_; }
    InstanceRole role() const { return role_; }
    InstanceSpec with_role(InstanceRole role) const { return InstanceSpec(family_, role); }

    /// (p, q) for this role; q == p under the null.
    std::pair<DiscreteDistribution, DiscreteDistribution> materialize() const;

    std::size_t domain_size() const;

    /// Short stable label, e.g. "two-bump".
    std::string name() const;

private:
    Family family_;
    InstanceRole role_;
};

}  // namespace closeness
