#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace caerom {

/// Source of the draws used by the data generators. Abstract so tests can script it.
class RandomSource {
public:
    virtual ~RandomSource() = default;

    /// Uniform integer in [lo, hi].
    virtual std::size_t uniform_index(std::size_t lo, std::size_t hi) = 0;
    /// Uniform real in [lo, hi).
    virtual double uniform(double lo, double hi) = 0;
    /// Uniform real in (lo, hi].
    virtual double uniform_upper(double lo, double hi) = 0;
    /// Standard normal.
    virtual double normal() = 0;
};

/// mt19937_64 with platform-independent conversions (53-bit uniforms, Marsaglia
/// polar normals, rejection-sampled integers), so a seed gives the same stream
/// with any standard library.
class Rng final : public RandomSource {
public:
    explicit Rng(std::uint64_t seed);

    /// Independent stream for item `index` of a job seeded with `seed`:
    /// the engine is seeded with splitmix64(seed + (index + 1) * golden_gamma).
    static Rng stream(std::uint64_t seed, std::uint64_t index);

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform in [0, 1) with 53 random bits.
    double uniform01();

    std::size_t uniform_index(std::size_t lo, std::size_t hi) override;
    double uniform(double lo, double hi) override;
    double uniform_upper(double lo, double hi) override;
    double normal() override;

    /// Fisher-Yates shuffle driven by this stream.
    template <typename It>
    void shuffle(It first, It last) {
        const auto n = static_cast<std::size_t>(last - first);
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j = uniform_index(0, i - 1);
            std::swap(first[i - 1], first[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace caerom
