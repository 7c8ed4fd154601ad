#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsrec/glyphs.hpp"
#include "fsrec/image.hpp"
#include "fsrec/rng.hpp"
#include "fsrec/tensor.hpp"
#include "fsrec/vocab.hpp"

namespace fsrec::data {

/// Per-signer rendering style; all parameters derive deterministically from
/// (id, dataset seed).  Pool styles for unlabeled data use ids >= kPoolStyleBase,
/// so they never collide with labeled signers.
struct SignerStyle {
    int id = 0;
    std::uint64_t seed = 0;
    double scale = 1.0;
    double shear = 0.0;
    double brightness = 1.0;
    double jitter_px = 1.0;
    double noise_std = 0.02;
    int thickness = 0;

    static SignerStyle make(int id, std::uint64_t dataset_seed) {
        SignerStyle s;
        s.id = id;
        s.seed = dataset_seed;
        Rng rng = Rng(dataset_seed).split("style").split(static_cast<std::uint64_t>(id));
        s.scale = rng.uniform(0.82, 1.0);
        s.shear = rng.uniform(-0.28, 0.28);
        s.brightness = rng.uniform(0.65, 1.0);
        s.jitter_px = rng.uniform(0.6, 1.8);
        s.noise_std = rng.uniform(0.015, 0.04);
        s.thickness = static_cast<int>(rng.below(3));
        return s;
    }
};

inline constexpr int kPoolStyleBase = 1000;

/// The letter template under a signer's distortion (thickness, shear, scale,
/// brightness); deterministic per (letter, style).
inline Tensor styled_glyph(char letter, const SignerStyle& style) {
    Tensor g = glyph_template(letter);
    if (style.thickness > 0) g = max_filter(g, style.thickness);
    g = warp(g, style.scale, 0.0, style.shear, 0.0, 0.0);
    for (double& v : g.values()) v *= style.brightness;
    clamp01(g);
    return g;
}

/// A word instance: S frames of 64x64 values in [0, 1].
struct FrameSequence {
    std::vector<Tensor> frames;
    int signer = -1;
    std::string word;

    std::size_t size() const { return frames.size(); }

    /// Frames flattened into an S x 4096 matrix.
    Tensor stacked() const {
        std::size_t s = frames.size(), d = kImageSize * kImageSize;
        Tensor out({s, d});
        for (std::size_t i = 0; i < s; ++i) {
            for (std::size_t j = 0; j < d; ++j) out.at(i, j) = frames[i][j];
        }
        return out;
    }
};

namespace detail {

inline Tensor render_frame(const Tensor& base, const SignerStyle& style, Rng& rng) {
    double dx = rng.normal() * style.jitter_px;
    double dy = rng.normal() * style.jitter_px;
    Tensor out = warp(base, 1.0, 0.0, 0.0, dx, dy);
    for (double& v : out.values()) v += rng.normal() * style.noise_std;
    clamp01(out);
    return out;
}

}  // namespace detail

/// Renders a fingerspelled word: frames_per_letter jittered frames per
/// letter, with transition_frames cross-faded frames between consecutive
/// letters.  Fully deterministic per (word, style, seed).
inline FrameSequence synth_generate(const std::string& word, const SignerStyle& style,
                                    std::size_t frames_per_letter, std::size_t transition_frames,
                                    std::uint64_t seed) {
    if (word.empty()) throw std::invalid_argument("synth_generate: empty word");
    if (frames_per_letter < 1) throw std::invalid_argument("synth_generate: frames_per_letter must be >= 1");
    Vocab vocab;
    std::vector<int> ids;
    try {
        ids = vocab.to_ids(word);
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("synth_generate: word '" + word + "' has characters outside A-Z");
    }

    std::vector<Tensor> glyphs;
    glyphs.reserve(ids.size());
    for (int id : ids) glyphs.push_back(styled_glyph(vocab.letter_char(id), style));

    FrameSequence seq;
    seq.signer = style.id;
    seq.word = word;
    Rng rng = Rng(seed).split("frames");
    for (std::size_t li = 0; li < glyphs.size(); ++li) {
        for (std::size_t f = 0; f < frames_per_letter; ++f) {
            seq.frames.push_back(detail::render_frame(glyphs[li], style, rng));
        }
        if (li + 1 < glyphs.size()) {
            for (std::size_t k = 0; k < transition_frames; ++k) {
                double w = static_cast<double>(k + 1) / static_cast<double>(transition_frames + 1);
                Tensor mix({kImageSize, kImageSize});
                for (std::size_t j = 0; j < mix.size(); ++j) {
                    mix[j] = (1.0 - w) * glyphs[li][j] + w * glyphs[li + 1][j];
                }
                seq.frames.push_back(detail::render_frame(mix, style, rng));
            }
        }
    }
    return seq;
}

/// Single frames drawn from extra synthetic styles disjoint from the labeled
/// signers, standing in for external unlabeled hand data.
inline std::vector<Tensor> make_unlabeled_pool(std::size_t n_frames, std::size_t n_styles,
                                               std::uint64_t seed) {
    if (n_frames < 1) throw std::invalid_argument("make_unlabeled_pool: n_frames must be >= 1");
    if (n_styles < 1) throw std::invalid_argument("make_unlabeled_pool: n_styles must be >= 1");
    std::vector<SignerStyle> styles;
    styles.reserve(n_styles);
    for (std::size_t i = 0; i < n_styles; ++i) {
        styles.push_back(SignerStyle::make(kPoolStyleBase + static_cast<int>(i), seed));
    }
    // Lazily rendered glyph cache per (style, letter).
    std::vector<std::vector<Tensor>> cache(n_styles, std::vector<Tensor>(26));
    std::vector<std::vector<bool>> cached(n_styles, std::vector<bool>(26, false));

    std::vector<Tensor> pool;
    pool.reserve(n_frames);
    Rng rng = Rng(seed).split("pool");
    for (std::size_t k = 0; k < n_frames; ++k) {
        std::size_t si = static_cast<std::size_t>(rng.below(n_styles));
        std::size_t li = static_cast<std::size_t>(rng.below(26));
        if (!cached[si][li]) {
            cache[si][li] = styled_glyph(static_cast<char>('A' + li), styles[si]);
            cached[si][li] = true;
        }
        pool.push_back(detail::render_frame(cache[si][li], styles[si], rng));
    }
    return pool;
}

/// Stacks a window of w frames (w odd) centered on each frame, replicating
/// the edge frames at the boundaries.  Output length equals input length;
/// each entry is the flattened concatenation of w frames.
inline std::vector<Tensor> window_frames(const std::vector<Tensor>& frames, std::size_t w) {
    if (w % 2 == 0 || w < 1) throw std::invalid_argument("window_frames: window size must be odd");
    std::size_t s = frames.size();
    std::vector<Tensor> out;
    out.reserve(s);
    long half = static_cast<long>(w / 2);
    for (long i = 0; i < static_cast<long>(s); ++i) {
        std::size_t d = frames[static_cast<std::size_t>(i)].size();
        Tensor window({w * d});
        for (long k = -half; k <= half; ++k) {
            long idx = std::min(std::max(i + k, 0l), static_cast<long>(s) - 1);
            const Tensor& f = frames[static_cast<std::size_t>(idx)];
            std::size_t base = static_cast<std::size_t>(k + half) * d;
            for (std::size_t j = 0; j < d; ++j) window[base + j] = f[j];
        }
        out.push_back(std::move(window));
    }
    return out;
}

}  // namespace fsrec::data
