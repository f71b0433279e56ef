#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace chatboost {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// 64-bit FNV-1a over the bytes of a string-like range.
inline uint64_t fnv1a64(const char* data, size_t n) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (size_t i = 0; i < n; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Uniform in (0, 1) derived from a hash key; stateless.
inline double unit_from_hash(uint64_t key) {
    return (static_cast<double>(splitmix64(key) >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal derived from a hash key; stateless (Box-Muller).
inline double normal_from_hash(uint64_t key) {
    double u1 = unit_from_hash(key);
    double u2 = unit_from_hash(key ^ 0x5851f42d4c957f2dULL);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

/// Deterministic RNG. The raw mt19937_64 stream is pinned by the standard,
/// so draws reproduce across platforms; the helpers below avoid
/// std::uniform_*_distribution, whose output is implementation-defined.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    /// Unbiased draw in [0, n); n must be positive.
    uint64_t uniform_u64(uint64_t n) {
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t r;
        do {
            r = next_u64();
        } while (r >= limit);
        return r % n;
    }

    /// Draw in [lo, hi], inclusive.
    int64_t uniform_int(int64_t lo, int64_t hi) {
        return lo + static_cast<int64_t>(uniform_u64(static_cast<uint64_t>(hi - lo) + 1));
    }

    /// Draw in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Standard normal via Box-Muller.
    double normal() {
        double u1;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * uniform());
    }

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[uniform_u64(i)]);
        }
    }

    /// Random permutation of [0, m).
    std::vector<uint32_t> permutation(size_t m) {
        std::vector<uint32_t> p(m);
        for (size_t i = 0; i < m; ++i) p[i] = static_cast<uint32_t>(i);
        shuffle(p);
        return p;
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace chatboost
