#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace lmrank {

// SplitMix64 (Steele, Lea, Flood 2014). One multiply-xorshift chain per
// output; the full algorithm is these three lines, so plans generated from a
// seed can be reproduced in any language without linking this library.
// All integer paths (next, next_below, shuffle) are exact and portable.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Unbiased integer in [0, bound) via rejection sampling.
    std::uint64_t next_below(std::uint64_t bound) {
        if (bound == 0) {
            throw std::invalid_argument("Rng::next_below: bound must be positive");
        }
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x = next();
        while (x >= limit) {
            x = next();
        }
        return x % bound;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller; consumes two uniforms per pair.
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u1 in (0,1] so the log is finite.
        const double u1 = static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    // Fisher-Yates. shuffle_prefix(v, k) puts a uniform k-subset in random
    // order at v[0..k); the rest of v is left in unspecified order.
    template <typename T>
    void shuffle_prefix(std::vector<T>& v, std::size_t k) {
        for (std::size_t i = 0; i < k && i + 1 < v.size(); ++i) {
            const std::size_t j = i + next_below(v.size() - i);
            std::swap(v[i], v[j]);
        }
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        shuffle_prefix(v, v.size());
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace lmrank
