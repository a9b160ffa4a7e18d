#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace indoorsq {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline uint64_t fnv1a(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

// Deterministic, splittable random source. Streams derived from the same root
// seed but different (tag, index) pairs are statistically independent, so every
// object / phase gets its own reproducible sequence regardless of scheduling.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(splitmix64(seed)) {}

    static Rng stream(uint64_t seed, std::string_view tag, uint64_t a = 0, uint64_t b = 0) {
        uint64_t s = splitmix64(seed ^ fnv1a(tag));
        s = splitmix64(s ^ a);
        s = splitmix64(s ^ (b + 0x9e3779b97f4a7c15ull));
        return Rng(s);
    }

    uint64_t next_u64() { return eng_(); }

    double uniform() { // [0, 1)
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // [0, n)
    uint64_t uniform_int(uint64_t n) {
        // rejection sampling keeps the draw unbiased
        uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do {
            v = eng_();
        } while (v >= limit);
        return v % n;
    }

    double normal(double mean, double stddev) {
        // Box-Muller without state: deterministic draw order matters more here
        // than squeezing both variates out of one pair.
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        return mean + stddev * z;
    }

    double normal_at_least(double mean, double stddev, double lo) {
        for (;;) {
            double v = normal(mean, stddev);
            if (v >= lo) return v;
        }
    }

private:
    std::mt19937_64 eng_;
};

} // namespace indoorsq
