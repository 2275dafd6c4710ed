#pragma once

#include <cstdint>

namespace noprop {

// splitmix64 finalizer; also used to derive substream seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Seed for the index-th substream of a master seed. Streams derived for
// different (master, index) pairs are statistically independent, so results
// do not depend on which worker consumes which index.
std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) noexcept;

// xoshiro256++ stream. Each sample path / orbit owns one.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) noexcept;

    std::uint64_t next_u64() noexcept;

    // Uniform in the open interval (0,1); exactly one next_u64 per call.
    double next_uniform() noexcept;

    // Standard normal via the inverse CDF; exactly one next_u64 per call.
    // A deterministic draw count is what makes common-random-number reruns
    // and worker-count-independent reductions possible.
    double next_normal() noexcept;

private:
    std::uint64_t s_[4];
};

// Inverse of the standard normal CDF (Wichura's AS241, double precision).
double inverse_normal_cdf(double p) noexcept;

// Standard normal CDF, accurate in both tails.
double normal_cdf(double x) noexcept;

} // namespace noprop
