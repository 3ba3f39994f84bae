#pragma once

#include <cstdint>
#include <random>

namespace ipmf {

/// Reproducible random source: std::mt19937_64 (fully specified by the C++
/// standard) with hand-written uniform and Box-Muller normal transforms, so a
/// seed yields the same stream on every conforming platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t nextU64() { return engine_(); }

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform();

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi);

    double normal();

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool hasSpare_ = false;
};

/// SplitMix64 mix of (seed, stream) for independent per-shard or per-instance streams.
std::uint64_t deriveSeed(std::uint64_t seed, std::uint64_t stream);

} // namespace ipmf
