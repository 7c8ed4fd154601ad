#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fsrec/rng.hpp"
#include "fsrec/tensor.hpp"

namespace fsrec::num {

/// Xavier (Glorot) uniform initialization: values in
/// +-sqrt(6 / (fan_in + fan_out)).  For rank-2 shapes fan_in is the row
/// count and fan_out the column count; a rank-1 shape counts as (n, 1).
inline Tensor xavier_init(const std::vector<std::size_t>& shape, Rng rng) {
    Tensor t(shape);  // rejects empty and zero-sized shapes
    std::size_t fan_in = shape[0];
    std::size_t fan_out = shape.size() >= 2 ? shape[1] : 1;
    double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-bound, bound);
    return t;
}

inline Tensor xavier_init(const std::vector<std::size_t>& shape, std::uint64_t seed) {
    return xavier_init(shape, Rng(seed));
}

/// Inverted dropout on a plain tensor: while training each entry is kept
/// with probability retain_p and scaled by 1/retain_p; at inference the
/// input passes through unchanged.
inline Tensor dropout(const Tensor& t, double retain_p, Rng& rng, bool training) {
    if (retain_p <= 0.0 || retain_p > 1.0) {
        throw std::invalid_argument("dropout: retain probability must be in (0, 1]");
    }
    if (!training || retain_p == 1.0) return t;
    Tensor out(t.shape());
    double inv = 1.0 / retain_p;
    for (std::size_t i = 0; i < t.size(); ++i) {
        out[i] = rng.uniform() < retain_p ? t[i] * inv : 0.0;
    }
    return out;
}

inline Tensor dropout(const Tensor& t, double retain_p, std::uint64_t seed, bool training) {
    Rng rng(seed);
    return dropout(t, retain_p, rng, training);
}

}  // namespace fsrec::num
