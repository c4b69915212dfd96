#pragma once

#include <cstdint>

namespace csid {

// xoshiro256++ seeded through splitmix64, with Gaussian draws via the polar
// method. Hand-rolled so sequences are identical across standard libraries;
// byte-identical experiment outputs depend on that.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed);

    std::uint64_t next_u64();
    // Uniform in [0, 1) with 53 random bits.
    double uniform01();
    // Standard normal draw.
    double normal();
    // sigma * normal(); sigma = 0 degenerates to exactly 0 while still
    // consuming the same underlying draws.
    double normal(double sigma) { return sigma * normal(); }

private:
    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Stream purposes keep independently seeded parts of an experiment from
// colliding: adding systems or clusters never perturbs other streams.
enum class StreamPurpose : std::uint64_t {
    system_data = 1,
    warm_init = 2,
    baseline_init = 3,
};

// Derives an independent stream from (master seed, purpose, index).
RandomStream derive_stream(std::uint64_t master_seed, StreamPurpose purpose,
                           std::uint64_t index);

} // namespace csid
