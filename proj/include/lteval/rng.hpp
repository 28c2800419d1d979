#pragma once

#include <array>
#include <cstdint>

namespace lteval {

/// xoshiro256** seeded through splitmix64. All randomness in the harness
/// goes through this generator so streams and models are reproducible
/// across platforms and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0);

    std::uint64_t next_u64();

    // Uniform in [0, 1) with 53 bits of resolution.
    double uniform();

    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n);

    // Standard normal via the Marsaglia polar method. The second variate of
    // each accepted pair is cached and returned by the next call.
    double gaussian();

    // Poisson sample by inverse transform. Means above 30 are split into
    // equal chunks whose draws are summed, keeping exp(-mean) representable.
    std::uint32_t poisson(double mean);

private:
    std::array<std::uint64_t, 4> s_{};
    bool have_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& state);

} // namespace lteval
