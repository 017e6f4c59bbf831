#pragma once

#include <cstdint>
#include <string_view>

namespace lobgen {

/// SplitMix64 finalizer; bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives a component seed from the master seed, a component name and an
/// index. All randomness in a run flows from one master seed through this
/// function, so partial pipelines (e.g. re-running only the simulation)
/// reproduce exactly.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view component,
                                 std::uint64_t index = 0) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the component name
    for (char c : component) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return mix64(mix64(master ^ h) ^ index);
}

}  // namespace lobgen
