#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>

namespace spce {

/// SplitMix64 finalizer. Used as the one-way mixing step for all seed
/// derivation; never used as a generator by itself.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Substream derivation rule: fold each tag into the mixed master seed,
/// one mixing step per tag. Order-sensitive, so (a, b) and (b, a) name
/// different streams. Every module that needs more than one stream per
/// master seed derives them through this function with distinct tags.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> tags) noexcept {
    std::uint64_t s = mix64(master);
    for (std::uint64_t t : tags) s = mix64(s ^ mix64(t));
    return s;
}

/// Well-known tags for derived substreams.
namespace seed_tag {
inline constexpr std::uint64_t source = 0x01;
inline constexpr std::uint64_t station_a = 0x02;
inline constexpr std::uint64_t station_b = 0x03;
inline constexpr std::uint64_t chsh_pass = 0x04;
inline constexpr std::uint64_t scan_point = 0x05;
inline constexpr std::uint64_t calibration = 0x06;
inline constexpr std::uint64_t ar_noise = 0x07;
}  // namespace seed_tag

/// Seeded random stream: a std::mt19937_64 engine with hand-rolled variate
/// transforms. The engine's output sequence is pinned by the standard and
/// the transforms below avoid std::*_distribution, whose algorithms are
/// implementation-defined, so streams are reproducible across platforms.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    /// Uniform draw in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; the second variate of each pair is
    /// cached, so draws come in deterministic pairs.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    /// +1 with probability p_plus, else -1.
    int sign_with_probability(double p_plus) {
        return uniform() < p_plus ? +1 : -1;
    }

    /// Index draw from a cumulative weight table (last entry = total mass).
    std::size_t categorical(std::span<const double> cumulative) {
        if (cumulative.empty()) throw std::invalid_argument("categorical: empty table");
        const double u = uniform() * cumulative.back();
        std::size_t lo = 0, hi = cumulative.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (cumulative[mid] <= u)
                lo = mid + 1;
            else
                hi = mid;
        }
        return lo;
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace spce
