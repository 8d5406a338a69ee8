#pragma once

#include <cstdint>

#include "ranklab/numeric.hpp"

namespace ranklab {

/// Counter-based generator ("splitmix64-counter"): every output is a pure
/// function of (seed, stream, counter), so substreams indexed per sample are
/// reproducible bit-for-bit on any platform and independent of worker count.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream) {}

    static constexpr const char* kName = "splitmix64-counter";

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    CounterRng substream(std::uint64_t index) const {
        return CounterRng(seed_, mix(stream_ * 0x9E3779B97F4A7C15ull + index + 1));
    }

    std::uint64_t next() {
        std::uint64_t z = seed_ + counter_++ * 0x9E3779B97F4A7C15ull +
                          stream_ * 0xD1B54A32D192ED03ull;
        return mix(z);
    }

    /// Uniform double in [0, 1), 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform big integer in [0, bound), bound >= 1, by rejection.
    Int uniform_below(const Int& bound);

    /// Poisson(mean) count by inversion; mean must be modest (desk scale).
    std::uint64_t poisson(double mean);

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

} // namespace ranklab
