#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

#include "fsrec/rng.hpp"
#include "fsrec/tensor.hpp"

namespace fsrec::data {

using num::Rng;
using num::Tensor;

inline constexpr std::size_t kImageSize = 64;

inline void check_frame(const Tensor& img) {
    if (img.ndim() != 2 || img.shape()[0] != kImageSize || img.shape()[1] != kImageSize) {
        throw std::invalid_argument("expected a 64x64 frame, got " + img.shape_str());
    }
}

inline void clamp01(Tensor& img) {
    for (double& v : img.values()) v = std::min(1.0, std::max(0.0, v));
}

/// Bilinear sample with zero padding outside the image.
inline double sample_bilinear(const Tensor& img, double x, double y) {
    double fx = std::floor(x), fy = std::floor(y);
    int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
    double wx = x - fx, wy = y - fy;
    auto pix = [&](int yy, int xx) -> double {
        if (xx < 0 || yy < 0 || xx >= static_cast<int>(kImageSize) || yy >= static_cast<int>(kImageSize)) {
            return 0.0;
        }
        return img.at(static_cast<std::size_t>(yy), static_cast<std::size_t>(xx));
    };
    double v00 = pix(y0, x0), v01 = pix(y0, x0 + 1);
    double v10 = pix(y0 + 1, x0), v11 = pix(y0 + 1, x0 + 1);
    double top = v00 + wx * (v01 - v00);
    double bot = v10 + wx * (v11 - v10);
    return top + wy * (bot - top);
}

/// Geometric warp about the image center: content is sheared, rotated and
/// scaled, then shifted by (tx, ty) pixels.  Inverse-mapped with bilinear
/// resampling and zero padding, so the identity parameters reproduce the
/// input exactly.
inline Tensor warp(const Tensor& img, double scale, double rot_rad, double shear_x, double tx,
                   double ty) {
    check_frame(img);
    // forward 2x2: scale * rotation * shear
    double c = std::cos(rot_rad), s = std::sin(rot_rad);
    double m00 = scale * (c + 0.0), m01 = scale * (c * shear_x - s);
    double m10 = scale * (s + 0.0), m11 = scale * (s * shear_x + c);
    double det = m00 * m11 - m01 * m10;
    if (std::abs(det) < 1e-12) throw std::invalid_argument("warp: singular transform");
    double i00 = m11 / det, i01 = -m01 / det;
    double i10 = -m10 / det, i11 = m00 / det;
    double center = (static_cast<double>(kImageSize) - 1.0) / 2.0;

    Tensor out({kImageSize, kImageSize});
    for (std::size_t y = 0; y < kImageSize; ++y) {
        for (std::size_t x = 0; x < kImageSize; ++x) {
            double px = static_cast<double>(x) - center - tx;
            double py = static_cast<double>(y) - center - ty;
            double sx = i00 * px + i01 * py + center;
            double sy = i10 * px + i11 * py + center;
            out.at(y, x) = sample_bilinear(img, sx, sy);
        }
    }
    return out;
}

/// Grayscale dilation with a square window; radius 0 is the identity.
inline Tensor max_filter(const Tensor& img, int radius) {
    check_frame(img);
    if (radius <= 0) return img;
    Tensor out({kImageSize, kImageSize});
    int n = static_cast<int>(kImageSize);
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            double m = 0.0;
            for (int dy = -radius; dy <= radius; ++dy) {
                for (int dx = -radius; dx <= radius; ++dx) {
                    int yy = y + dy, xx = x + dx;
                    if (yy < 0 || xx < 0 || yy >= n || xx >= n) continue;
                    m = std::max(m, img.at(static_cast<std::size_t>(yy), static_cast<std::size_t>(xx)));
                }
            }
            out.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = m;
        }
    }
    return out;
}

/// One 3x3 box blur pass (zero padded).
inline Tensor box_blur(const Tensor& img) {
    check_frame(img);
    Tensor out({kImageSize, kImageSize});
    int n = static_cast<int>(kImageSize);
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            double acc = 0.0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    int yy = y + dy, xx = x + dx;
                    if (yy < 0 || xx < 0 || yy >= n || xx >= n) continue;
                    acc += img.at(static_cast<std::size_t>(yy), static_cast<std::size_t>(xx));
                }
            }
            out.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = acc / 9.0;
        }
    }
    return out;
}

/// Augmentation transform: fixed scale ratio, translation of a fixed offset
/// in a seed-drawn random direction, rotation at a seed-drawn random angle
/// up to the given bound (both directions).
struct TransformSpec {
    double scale = 1.0;
    double translate_px = 0.0;
    double rotate_deg = 0.0;  // bound on the magnitude
    std::uint64_t seed = 0;
};

inline Tensor augment(const Tensor& frame, const TransformSpec& spec) {
    check_frame(frame);
    Rng rng = Rng(spec.seed).split("augment");
    double dir = rng.uniform(0.0, 2.0 * std::numbers::pi);
    double angle = rng.uniform(-spec.rotate_deg, spec.rotate_deg) * std::numbers::pi / 180.0;
    double tx = spec.translate_px == 0.0 ? 0.0 : spec.translate_px * std::cos(dir);
    double ty = spec.translate_px == 0.0 ? 0.0 : spec.translate_px * std::sin(dir);
    Tensor out = warp(frame, spec.scale, angle, 0.0, tx, ty);
    clamp01(out);
    return out;
}

}  // namespace fsrec::data
