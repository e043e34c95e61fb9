#pragma once

#include <cstdint>
#include <string_view>

namespace bandsim {

// Deterministic, platform-independent randomness. Every random quantity in
// the toolkit is either a counted draw from SeededRng or a stateless keyed
// draw (hash of seed + stream + index), so results are reproducible bit-exactly
// across runs, worker counts, and evaluation order.

// Finalizer from splitmix64.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) {
    return mix64(seed ^ (value + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2)));
}

// FNV-1a over the bytes of a string, folded into seed.
inline std::uint64_t hash_string(std::uint64_t seed, std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return hash_combine(seed, h);
}

// Map 64 random bits to [0, 1) with 53-bit resolution.
constexpr double unit_from_bits(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Counter-based generator: the k-th draw is a pure function of (seed, k).
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next_u64() { return mix64(seed_ + 0x632be59bd9b4e019ull * ++counter_); }
    double next_unit() { return unit_from_bits(next_u64()); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }
    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

// Stateless draw keyed by (seed, stream, index); index may be negative
// (stripe indices extend below zero for some orientations).
inline double keyed_unit(std::uint64_t seed, std::uint64_t stream, std::int64_t index) {
    return unit_from_bits(hash_combine(hash_combine(seed, stream), static_cast<std::uint64_t>(index)));
}

inline double keyed_unit2(std::uint64_t seed, std::uint64_t stream, std::int64_t i, std::int64_t j) {
    std::uint64_t h = hash_combine(hash_combine(seed, stream), static_cast<std::uint64_t>(i));
    return unit_from_bits(hash_combine(h, static_cast<std::uint64_t>(j)));
}

} // namespace bandsim
