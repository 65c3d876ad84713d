#pragma once

#include <cstdint>

namespace schauder {

// splitmix64 finalizer; deterministic across platforms.
inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Uniform double in [0,1) from a counter.
inline double counter_to_unit(std::uint64_t z) {
    return static_cast<double>(splitmix64(z) >> 11) * 0x1.0p-53;
}

}  // namespace schauder
