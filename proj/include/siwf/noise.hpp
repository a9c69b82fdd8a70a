// noise.hpp — reproducible Brownian increments.
//
// Increments come from a counter-based generator (Philox4x32-10): the value
// for (seed, stream, step, channel) is a pure function of that tuple, so any
// trajectory can be regenerated independently of how many threads ran or in
// which order. Gaussians use Box-Muller, which consumes a fixed number of
// uniforms per variate.

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace siwf {

class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter ctr, Key key);
};

// Mixes a 64-bit value (SplitMix64 finalizer).
std::uint64_t mix64(std::uint64_t x);

// Independent seed for a named role (e.g. the second route of a comparison).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

// Standard normal variate number `index` of the given stream.
double standard_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

class NoisePath {
public:
    NoisePath(std::uint64_t seed, std::uint64_t stream, int n_channels, double dt, long n_steps,
              std::vector<double> increments);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }
    int n_channels() const noexcept { return n_channels_; }
    double dt() const noexcept { return dt_; }
    long n_steps() const noexcept { return n_steps_; }

    // Increments of all channels at step k.
    std::span<const double> step(long k) const {
        return {increments_.data() + k * n_channels_, static_cast<std::size_t>(n_channels_)};
    }
    const std::vector<double>& increments() const noexcept { return increments_; }

    // Path on the grid dt*factor obtained by summing consecutive increments;
    // n_steps must be divisible by factor.
    NoisePath coarsen(int factor) const;

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    int n_channels_;
    double dt_;
    long n_steps_;
    std::vector<double> increments_;  // row-major n_steps x n_channels
};

// Increments N(0, dt) for stream 0 of `seed`.
NoisePath generate_noise(std::uint64_t seed, int n_channels, double dt, long n_steps);

// Increments for substream `stream` (one per trajectory).
NoisePath generate_noise(std::uint64_t seed, std::uint64_t stream, int n_channels, double dt,
                         long n_steps);

}  // namespace siwf
