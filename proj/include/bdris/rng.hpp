#pragma once

#include <cstdint>
#include <random>

namespace bdris {

// Mixes a base seed with a stream tag so each matrix / trial gets its own
// independent substream. SplitMix64 finalizer.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Seedable, portable generator. mt19937_64 is fully specified by the
// standard; the uniform and normal draws below avoid std::*_distribution,
// whose output is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    Rng(std::uint64_t seed, std::uint64_t stream)
        : engine_(derive_seed(seed, stream)) {}

    // Uniform in [0, 1).
    double uniform();

    // Standard normal via Box-Muller.
    double normal();

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace bdris
