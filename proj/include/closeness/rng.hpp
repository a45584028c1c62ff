#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace closeness {

/// Seeded 64-bit generator with deterministic sub-stream derivation.
///
/// Every stochastic routine in the library takes an `Rng&` explicitly.
/// Parallel callers derive one stream per unit of work with
/// `Rng::stream(master, index)`, so results never depend on how work is
/// scheduled across threads.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Independent stream keyed by (master seed, stream index).
    static Rng stream(std::uint64_t master, std::uint64_t index) {
        return Rng(derive_seed(master, index));
    }

    static std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0, 1].
    double uniform_pos() { return 1.0 - uniform(); }

    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound);

    double exponential();

    bool coin() { return (engine_() >> 63) != 0; }

private:
    std::mt19937_64 engine_;
};

}  // namespace closeness
