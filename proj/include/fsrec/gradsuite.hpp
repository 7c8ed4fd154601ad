#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <cmath>

#include "fsrec/errors.hpp"
#include "fsrec/gradcheck.hpp"
#include "fsrec/seq2seq.hpp"

namespace fsrec::nn {

/// The standard small configuration for gradient checking: 8x8 frames,
/// hidden width 8, latent 4, word length 2.
inline ModelConfig gradcheck_config(AeMode mode) {
    ModelConfig cfg;
    cfg.image_dim = 64;
    cfg.mlp_hidden = 8;
    cfg.latent_dim = 4;
    cfg.lstm_hidden = 8;
    cfg.embed_dim = 8;
    cfg.attn_dim = 8;
    cfg.num_letters = 26;
    cfg.mode = mode;
    cfg.lambda_ae = mode == AeMode::None ? 0.0 : 1.0;
    cfg.dropout_retain = 0.8;
    return cfg;
}

struct GradCheckResult {
    AeMode mode;
    double max_rel_error = 0.0;  // worst per-tensor norm-relative error
    std::string worst_entry;     // name of the worst tensor
    std::size_t parameters = 0;
};

/// Central finite-difference check of every parameter gradient of the
/// multitask training loss (dropout and mode-specific randomness active,
/// fixed by the seed).  Each parameter tensor's gradient is compared in the
/// L2 norm: ||analytic - fd|| / max(||analytic||, ||fd||, 1e-8).  Entrywise
/// comparison is hopeless at this scale: central differences carry a
/// roundoff floor of about |loss|*u/(2*eps) ~ 1e-11, which swamps the
/// handful of parameter entries whose true gradient is below ~1e-7.
inline GradCheckResult run_gradient_check(AeMode mode, std::uint64_t seed, double eps = 1e-5) {
    ModelConfig cfg = gradcheck_config(mode);
    ModelParams params = ModelParams::init(cfg, seed);

    const std::size_t s_frames = 3;
    num::Rng data_rng = num::Rng(seed).split("gradcheck-data");
    num::Tensor frames({s_frames, cfg.image_dim});
    // mostly-dark frames, like hand crops on a dark background; also keeps
    // the reconstruction loss small enough for clean central differences
    for (std::size_t i = 0; i < frames.size(); ++i) frames[i] = 0.25 * data_rng.uniform();
    std::vector<int> letters = {static_cast<int>(data_rng.below(cfg.num_letters)),
                                static_cast<int>(data_rng.below(cfg.num_letters))};

    auto loss_fn = [&]() {
        return multitask_loss_value(params, frames, letters, seed, /*training=*/true);
    };
    double l0 = loss_fn();
    if (l0 != loss_fn()) throw NumericError("gradient check: loss is not deterministic");

    num::Tape tape;
    TapeModel tm = TapeModel::leaf_all(tape, params);
    num::Rng rng(seed);
    MultitaskLoss loss = build_multitask_loss(tape, tm, cfg, frames, letters, rng, /*training=*/true);
    tape.backward(loss.total);
    std::vector<num::Tensor> grads = tm.gradients(tape);

    GradCheckResult result;
    result.mode = mode;
    auto named = params.named();
    for (std::size_t k = 0; k < named.size(); ++k) {
        num::Tensor& p = *named[k].tensor;
        const num::Tensor& analytic = grads[k];
        result.parameters += p.size();
        double diff_sq = 0.0, a_sq = 0.0, fd_sq = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            double orig = p[i];
            p[i] = orig + eps;
            double lp = loss_fn();
            p[i] = orig - eps;
            double lm = loss_fn();
            p[i] = orig;
            double fd = (lp - lm) / (2.0 * eps);
            double d = analytic[i] - fd;
            diff_sq += d * d;
            a_sq += analytic[i] * analytic[i];
            fd_sq += fd * fd;
        }
        double denom = std::max({std::sqrt(a_sq), std::sqrt(fd_sq), 1e-8});
        double rel = std::sqrt(diff_sq) / denom;
        if (rel > result.max_rel_error) {
            result.max_rel_error = rel;
            result.worst_entry = named[k].name;
        }
    }
    return result;
}

inline std::vector<GradCheckResult> run_gradient_suite(std::uint64_t seed, double eps = 1e-5) {
    std::vector<GradCheckResult> results;
    for (AeMode mode : {AeMode::Ae, AeMode::Dae, AeMode::Vae, AeMode::None}) {
        results.push_back(run_gradient_check(mode, seed, eps));
    }
    return results;
}

}  // namespace fsrec::nn
