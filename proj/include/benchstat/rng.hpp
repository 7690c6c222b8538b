#pragma once

// Deterministic, platform-independent random streams. Stream keys are
// derived from (task, model, seed) with FNV-1a so that identical inputs
// produce identical draws on every platform; std:: distributions are
// avoided because their output is implementation-defined.

#include <cmath>
#include <cstdint>
#include <string_view>

namespace benchstat {

// FNV-1a 64-bit. Constants: offset 14695981039346656037, prime 1099511628211.
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (const char c : s) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// A small counter-based generator seeded by a 64-bit key only.
class Rng {
public:
    explicit Rng(std::uint64_t key) : state_(key) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform index in [0, n)
    std::size_t uniform_index(std::size_t n) {
        // 128-bit multiply avoids modulo bias for the n used here
        const unsigned __int128 wide =
            static_cast<unsigned __int128>(next_u64()) * n;
        return static_cast<std::size_t>(wide >> 64);
    }

    // standard normal via Box-Muller (pair cached)
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        const double u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        cached_ = r * std::sin(theta);
        has_cached_ = true;
        return r * std::cos(theta);
    }

private:
    std::uint64_t state_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace benchstat
