#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <vector>

namespace fsrec::num {

/// Counter-based pseudo-random generator.  Every draw is a pure function of
/// (key, counter), and independent streams are obtained by splitting with a
/// label or an index, so reordering unrelated consumers never perturbs a
/// stream.  The same (seed, split path, call order) is bitwise reproducible
/// on a given platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : key_(mix(seed ^ 0x9e3779b97f4a7c15ull)) {}

    /// Derives an independent stream for a named component.
    Rng split(std::string_view label) const {
        std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
        for (char c : label) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ull;
        }
        return Rng(FromKey{}, mix(key_ ^ h));
    }

    /// Derives an independent stream for an indexed consumer.
    Rng split(std::uint64_t index) const {
        return Rng(FromKey{}, mix(key_ + 0x9e3779b97f4a7c15ull * (index + 1)));
    }

    std::uint64_t next_u64() {
        counter_ += 0x9e3779b97f4a7c15ull;
        return mix(key_ ^ counter_);
    }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; two uniforms per draw, no caching, so
    /// the counter advances identically no matter how results are consumed.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    struct FromKey {};
    Rng(FromKey, std::uint64_t key) : key_(key) {}

    // SplitMix64 finalizer.
    static std::uint64_t mix(std::uint64_t x) {
        x ^= x >> 30;
        x *= 0xbf58476d1ce4e5b9ull;
        x ^= x >> 27;
        x *= 0x94d049bb133111ebull;
        x ^= x >> 31;
        return x;
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace fsrec::num
