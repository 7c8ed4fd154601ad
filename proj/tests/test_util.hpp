#pragma once

#include "fsrec/model.hpp"
#include "fsrec/rng.hpp"
#include "fsrec/tensor.hpp"

namespace fsrec::test {

/// Small architecture for fast unit tests; 4x4 frames by default.
inline nn::ModelConfig tiny_config(nn::AeMode mode, std::size_t num_letters = 4,
                                   std::size_t image_dim = 16) {
    nn::ModelConfig cfg;
    cfg.image_dim = image_dim;
    cfg.mlp_hidden = 6;
    cfg.latent_dim = 3;
    cfg.lstm_hidden = 5;
    cfg.embed_dim = 4;
    cfg.attn_dim = 4;
    cfg.num_letters = num_letters;
    cfg.mode = mode;
    cfg.lambda_ae = mode == nn::AeMode::None ? 0.0 : 1.0;
    cfg.dropout_retain = 0.8;
    return cfg;
}

inline nn::ModelParams tiny_params(nn::AeMode mode, std::uint64_t seed, std::size_t num_letters = 4,
                                   std::size_t image_dim = 16) {
    return nn::ModelParams::init(tiny_config(mode, num_letters, image_dim), seed);
}

/// Random frame batch with values in [0, 1].
inline num::Tensor random_frames(std::size_t s, std::size_t dim, std::uint64_t seed) {
    num::Rng rng(seed);
    num::Tensor frames({s, dim});
    for (std::size_t i = 0; i < frames.size(); ++i) frames[i] = rng.uniform();
    return frames;
}

/// Zeroes every parameter tensor in place.
inline void zero_params(nn::ModelParams& params) {
    for (auto& nt : params.named()) {
        for (double& v : nt.tensor->values()) v = 0.0;
    }
}

}  // namespace fsrec::test
