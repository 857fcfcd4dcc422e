#pragma once

#include <cmath>
#include <cstdint>

namespace nashlab {

// Counter-based random streams: every draw is a pure function of
// (seed, path, step, channel), so simulations are reproducible and
// trivially splittable across paths/players. Channel values 0..2^31
// are player indices; the high channels below are reserved.
inline constexpr std::uint64_t kCommonNoiseChannel = 0xffffffff00000001ull;
inline constexpr std::uint64_t kInitialSampleChannel = 0xffffffff00000002ull;

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
    // splitmix64 finalizer
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t key_hash(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                              std::uint64_t channel, std::uint64_t lane) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ mix64(path + 0x632be59bd9b4e019ull));
    h = mix64(h ^ mix64(step + 0x9e3779b97f4a7c15ull));
    h = mix64(h ^ mix64(channel + 0xc2b2ae3d27d4eb4full));
    return mix64(h ^ lane);
}

}  // namespace detail

/// Uniform draw in (0,1], keyed by counters.
inline double uniform01(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                        std::uint64_t channel, std::uint64_t lane = 0) {
    const std::uint64_t bits = detail::key_hash(seed, path, step, channel, lane);
    // 53-bit mantissa, shifted into (0,1]
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

/// Standard normal draw keyed by counters (Box-Muller, cosine branch).
inline double normal01(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                       std::uint64_t channel) {
    const double u1 = uniform01(seed, path, step, channel, 0);
    const double u2 = uniform01(seed, path, step, channel, 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

/// Deterministic stateful stream over the same keyed draws; used where a
/// sampler needs a sequence rather than a (path, step) lattice.
class CounterStream {
  public:
    CounterStream(std::uint64_t seed, std::uint64_t channel) : seed_(seed), channel_(channel) {}

    double uniform() { return uniform01(seed_, 0, next_++, channel_, 0); }
    double normal() { return normal01(seed_, 0, next_++, channel_); }

  private:
    std::uint64_t seed_;
    std::uint64_t channel_;
    std::uint64_t next_ = 0;
};

}  // namespace nashlab
