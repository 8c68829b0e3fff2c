#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mfabc {

using Rng = std::mt19937_64;

/// Independent substreams of one proposal. Each purpose gets its own engine so
/// that skipping a simulation never shifts the draws of another.
enum class Stream : std::uint64_t {
    proposal = 1,  // parameter draw, then the uniform u
    low_fidelity = 2,
    high_fidelity = 3,
    data = 4,
};

inline std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts)
{
    std::uint64_t h = 0x6a09e667f3bcc909ULL;
    for (std::uint64_t p : parts) h = mix64(h ^ mix64(p));
    return h;
}

inline Rng substream(std::uint64_t master, std::uint64_t generation, std::uint64_t index,
                     Stream stream)
{
    return Rng(derive_seed({master, generation, index, static_cast<std::uint64_t>(stream)}));
}

}  // namespace mfabc
