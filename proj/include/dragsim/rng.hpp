#pragma once

#include <cstdint>
#include <random>

namespace dragsim {

using Rng = std::mt19937_64;

// splitmix64, used to derive decorrelated seeds from a master seed.
inline std::uint64_t split_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seed for trace i, per the harness contract: master xor trace index.
inline std::uint64_t trace_seed(std::uint64_t master, std::uint64_t trace) {
    return master ^ trace;
}

}  // namespace dragsim
