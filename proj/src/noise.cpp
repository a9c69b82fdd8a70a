#include "siwf/noise.hpp"

#include "siwf/linalg.hpp"

#include <cmath>
#include <numbers>

namespace siwf {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

// (0, 1), never exactly 0 so log() stays finite.
inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t x = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

Philox4x32::Counter Philox4x32::block(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
        mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kPhiloxW0;
        key[1] += kPhiloxW1;
    }
    return ctr;
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    return mix64(seed ^ mix64(tag));
}

double standard_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    const std::uint64_t pair = index / 2;
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(pair), static_cast<std::uint32_t>(pair >> 32),
                                  static_cast<std::uint32_t>(stream),
                                  static_cast<std::uint32_t>(stream >> 32)};
    const Philox4x32::Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    const auto r = Philox4x32::block(ctr, key);
    const double u1 = to_unit(r[0], r[1]);
    const double u2 = to_unit(r[2], r[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return (index % 2 == 0) ? radius * std::cos(angle) : radius * std::sin(angle);
}

NoisePath::NoisePath(std::uint64_t seed, std::uint64_t stream, int n_channels, double dt, long n_steps,
                     std::vector<double> increments)
    : seed_(seed), stream_(stream), n_channels_(n_channels), dt_(dt), n_steps_(n_steps),
      increments_(std::move(increments)) {
    if (!(dt > 0.0)) throw Error("NoisePath: dt must be positive");
    if (n_channels < 0 || n_steps < 0) throw Error("NoisePath: negative size");
    if (increments_.size() != static_cast<std::size_t>(n_channels) * static_cast<std::size_t>(n_steps))
        throw DimensionError("NoisePath: increment count does not match n_steps * n_channels");
}

NoisePath NoisePath::coarsen(int factor) const {
    if (factor < 1 || n_steps_ % factor != 0)
        throw Error("NoisePath::coarsen: n_steps must be divisible by the factor");
    const long coarse_steps = n_steps_ / factor;
    std::vector<double> out(static_cast<std::size_t>(coarse_steps * n_channels_), 0.0);
    for (long k = 0; k < coarse_steps; ++k)
        for (int j = 0; j < factor; ++j)
            for (int c = 0; c < n_channels_; ++c)
                out[static_cast<std::size_t>(k * n_channels_ + c)] +=
                    increments_[static_cast<std::size_t>((k * factor + j) * n_channels_ + c)];
    return NoisePath(seed_, stream_, n_channels_, dt_ * factor, coarse_steps, std::move(out));
}

NoisePath generate_noise(std::uint64_t seed, int n_channels, double dt, long n_steps) {
    return generate_noise(seed, 0, n_channels, dt, n_steps);
}

NoisePath generate_noise(std::uint64_t seed, std::uint64_t stream, int n_channels, double dt,
                         long n_steps) {
    if (!(dt > 0.0)) throw Error("generate_noise: dt must be positive");
    const double sd = std::sqrt(dt);
    const auto total = static_cast<std::size_t>(n_channels) * static_cast<std::size_t>(n_steps);
    std::vector<double> inc(total);
    for (std::size_t i = 0; i < total; ++i) inc[i] = sd * standard_normal(seed, stream, i);
    return NoisePath(seed, stream, n_channels, dt, n_steps, std::move(inc));
}

}  // namespace siwf
