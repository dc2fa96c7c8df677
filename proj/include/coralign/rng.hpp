#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <vector>

namespace coralign {

// FNV-1a 64-bit hash, used to fold a purpose tag into a seed so that
// independent random streams derived from one user seed never overlap.
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// SplitMix64 generator. Chosen over std:: engines because its output is
// fully specified, so identical seeds reproduce across implementations.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    SplitMix64(std::uint64_t seed, std::string_view tag)
        : state_(seed ^ fnv1a64(tag)) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53 mantissa bits.
    double next_double() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    // Standard normal deviate via Box-Muller; consumes two uniforms per
    // call so the stream position is input-independent.
    double next_gaussian() {
        double u1 = static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
        double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    // Uniform integer in [0, bound). Modulo bias is below 2^-53 for the
    // bounds used here (sample counts), far under reproducibility needs.
    std::size_t next_below(std::size_t bound) {
        return static_cast<std::size_t>(next() % static_cast<std::uint64_t>(bound));
    }

    // Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = next_below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

}  // namespace coralign
