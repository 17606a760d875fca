#pragma once

#include <cstdint>
#include <random>

namespace argmaxlab {

// Identifies one replicate of one experiment. The derived random stream is a
// pure function of (seed, replicate), so replicates can run in any order, on
// any thread, and still reproduce bit-for-bit.
struct SeedSpec {
    std::uint64_t seed = 0;
    std::uint64_t replicate = 0;
};

// splitmix64 finalizer; full-avalanche 64-bit mix.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t stream_key(const SeedSpec& s) {
    return mix64(mix64(s.seed) ^ mix64(s.replicate ^ 0xD1B54A32D192ED03ull));
}

inline std::mt19937_64 derive_stream(const SeedSpec& s) {
    return std::mt19937_64(stream_key(s));
}

// Sub-stream for a named role within one replicate (e.g. the bridge draw vs
// the independent normals in a reconstruction). Distinct salts give
// independent streams for the same (seed, replicate).
inline std::mt19937_64 derive_stream(const SeedSpec& s, std::uint64_t salt) {
    return std::mt19937_64(mix64(stream_key(s) ^ mix64(salt)));
}

}  // namespace argmaxlab
