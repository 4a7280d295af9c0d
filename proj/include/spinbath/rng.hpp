// rng.hpp — seed derivation and per-run random streams

#pragma once

#include <cstdint>
#include <random>

namespace spinbath {

using RngStream = std::mt19937_64;

// SplitMix64 mixing step.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Per-run seed for (master seed, sweep index, realization index).
// Distinct index tuples map to distinct seeds for any practical batch size,
// so parallel realizations never share generator state.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::uint64_t sweep_index,
                                 std::uint64_t realization_index) {
    std::uint64_t s = splitmix64(master ^ 0x6a09e667f3bcc909ULL);
    s = splitmix64(s ^ (sweep_index + 1) * 0xd1b54a32d192ed03ULL);
    s = splitmix64(s ^ (realization_index + 1) * 0x9e6c63d0876a9a47ULL);
    return s;
}

inline RngStream make_stream(std::uint64_t seed) { return RngStream(seed); }

}  // namespace spinbath
