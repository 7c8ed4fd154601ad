#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "fsrec/errors.hpp"
#include "fsrec/model.hpp"
#include "fsrec/rng.hpp"
#include "fsrec/tape.hpp"
#include "fsrec/tensor.hpp"

namespace fsrec::nn {

/// How the denoising auto-encoder corrupts its input.
struct CorruptionSpec {
    CorruptionKind kind = CorruptionKind::Masking;
    double strength = 0.25;  // mask probability, or noise standard deviation
};

/// Corrupts a frame batch: masking zeroes each entry independently with the
/// given probability; gaussian perturbs and clamps back to [0, 1].
inline Tensor dae_corrupt(const Tensor& x, const CorruptionSpec& spec, Rng rng) {
    if (spec.kind == CorruptionKind::Masking) {
        if (spec.strength < 0.0 || spec.strength >= 1.0) {
            throw std::invalid_argument("dae_corrupt: mask probability must be in [0, 1)");
        }
        Tensor out = x;
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (rng.uniform() < spec.strength) out[i] = 0.0;
        }
        return out;
    }
    if (spec.strength < 0.0) {
        throw std::invalid_argument("dae_corrupt: noise standard deviation must be >= 0");
    }
    Tensor out = x;
    for (std::size_t i = 0; i < out.size(); ++i) {
        double v = out[i] + spec.strength * rng.normal();
        out[i] = std::min(1.0, std::max(0.0, v));
    }
    return out;
}

/// Squared Euclidean reconstruction error.
inline double ae_loss(const Tensor& x, const Tensor& x_tilde) {
    if (x.size() != x_tilde.size()) {
        throw std::invalid_argument("ae_loss: length mismatch " + x.shape_str() + " vs " + x_tilde.shape_str());
    }
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double d = x[i] - x_tilde[i];
        s += d * d;
    }
    return s;
}

/// KL divergence of a diagonal Gaussian posterior from the standard normal
/// prior, in the nonnegative closed form 1/2 sum(mu^2 + sigma^2 - 1 - log sigma^2).
inline double kl_gaussian(const Tensor& mu, const Tensor& logvar) {
    if (mu.size() != logvar.size()) {
        throw std::invalid_argument("kl_gaussian: length mismatch");
    }
    if (!mu.all_finite() || !logvar.all_finite()) {
        throw NumericError("kl_gaussian: non-finite input");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        s += mu[i] * mu[i] + std::exp(logvar[i]) - 1.0 - logvar[i];
    }
    return 0.5 * s;
}

// ---- graph builders --------------------------------------------------------

struct EncodeVars {
    Var features;          // fed to the sequence model; mu for the VAE
    Var mu, logvar;        // VAE heads (invalid otherwise)
};

/// Encoder MLP over a frame batch (rows are frames).  Dropout sits between
/// the hidden layers while training.
inline EncodeVars build_encoder(Tape& t, const TapeModel& m, const ModelConfig& cfg, Var x, Rng& rng,
                                bool training) {
    Var h1 = t.dropout(t.relu(t.affine(x, m.enc.w1, m.enc.b1)), cfg.dropout_retain, rng, training);
    Var h2 = t.dropout(t.relu(t.affine(h1, m.enc.w2, m.enc.b2)), cfg.dropout_retain, rng, training);
    EncodeVars out;
    if (cfg.has_vae_heads()) {
        out.mu = t.affine(h2, m.enc.w_mu, m.enc.b_mu);
        Var raw = t.affine(h2, m.enc.w_logvar, m.enc.b_logvar);
        out.logvar = t.clamp(raw, -cfg.logvar_clamp, cfg.logvar_clamp);
        out.features = out.mu;
    } else {
        out.features = t.affine(h2, m.enc.w_mu, m.enc.b_mu);
    }
    return out;
}

struct DecodeVars {
    Var mu_x;
    Var logvar_x;  // only with learned output variance
};

inline DecodeVars build_decoder(Tape& t, const TapeModel& m, const ModelConfig& cfg, Var z, Rng& rng,
                                bool training) {
    Var h1 = t.dropout(t.relu(t.affine(z, m.dec.w1, m.dec.b1)), cfg.dropout_retain, rng, training);
    Var h2 = t.dropout(t.relu(t.affine(h1, m.dec.w2, m.dec.b2)), cfg.dropout_retain, rng, training);
    DecodeVars out;
    out.mu_x = t.affine(h2, m.dec.w_out, m.dec.b_out);
    if (cfg.mode == AeMode::Vae && cfg.vae_learned_output_variance) {
        Var raw = t.affine(h2, m.dec.w_logvar_out, m.dec.b_logvar_out);
        out.logvar_x = t.clamp(raw, -cfg.logvar_clamp, cfg.logvar_clamp);
    }
    return out;
}

/// KL term as a graph node, totalled over all rows of mu/logvar.
inline Var build_kl(Tape& t, Var mu, Var logvar) {
    Var mu2 = t.mul(mu, mu);
    Var sigma2 = t.exp(logvar);
    // 1 + logvar - mu^2 - sigma^2, summed, times -1/2
    Var inner = t.add(t.shift(logvar, 1.0), t.scale(t.add(mu2, sigma2), -1.0));
    return t.scale(t.sum(inner), -0.5);
}

/// Feature extraction plus (optionally) the per-mode auto-encoder objective
/// for one frame batch.  ae_total sums the per-frame losses; callers divide
/// by the frame count.  The VAE draws its reparameterized sample whenever
/// the loss branch is built; forced_eps overrides the draw for tests.
struct FeaturePipeline {
    EncodeVars encode;
    Var seq_features;
    Var ae_total;
    bool ae_built = false;
};

inline FeaturePipeline build_features(Tape& t, const TapeModel& m, const ModelConfig& cfg,
                                      const Tensor& frames, Rng& rng, bool training, bool with_ae_loss,
                                      const Tensor* forced_eps = nullptr) {
    if (frames.ndim() != 2 || frames.shape()[1] != cfg.image_dim) {
        throw std::invalid_argument("build_features: expected frames of width " +
                                    std::to_string(cfg.image_dim) + ", got " + frames.shape_str());
    }
    FeaturePipeline out;
    Var x = t.constant(frames);
    out.encode = build_encoder(t, m, cfg, x, rng, training);
    out.seq_features = out.encode.features;
    if (!with_ae_loss || cfg.mode == AeMode::None) return out;

    switch (cfg.mode) {
        case AeMode::Ae: {
            DecodeVars d = build_decoder(t, m, cfg, out.encode.features, rng, training);
            out.ae_total = t.squared_error(x, d.mu_x);
            break;
        }
        case AeMode::Dae: {
            // Encode the corrupted batch, reconstruct the clean one.
            CorruptionSpec spec{cfg.dae_corruption, cfg.dae_strength};
            Var xc = t.constant(dae_corrupt(frames, spec, rng.split("dae")));
            EncodeVars noisy = build_encoder(t, m, cfg, xc, rng, training);
            DecodeVars d = build_decoder(t, m, cfg, noisy.features, rng, training);
            out.ae_total = t.squared_error(x, d.mu_x);
            break;
        }
        case AeMode::Vae: {
            Tensor eps;
            if (forced_eps) {
                eps = *forced_eps;
            } else {
                Rng er = rng.split("eps");
                eps = Tensor(t.value(out.encode.mu).shape());
                for (std::size_t i = 0; i < eps.size(); ++i) eps[i] = er.normal();
            }
            Var sigma = t.exp(t.scale(out.encode.logvar, 0.5));
            Var sample = t.add(out.encode.mu, t.mul(sigma, t.constant(eps)));
            DecodeVars d = build_decoder(t, m, cfg, sample, rng, training);
            Var kl = build_kl(t, out.encode.mu, out.encode.logvar);
            Var recon;
            if (cfg.vae_learned_output_variance) {
                // 1/2 sum((x - mu_x)^2 * exp(-logvar_x) + logvar_x), constant dropped.
                Var diff = t.sub(x, d.mu_x);
                Var weighted = t.mul(t.mul(diff, diff), t.exp(t.scale(d.logvar_x, -1.0)));
                recon = t.scale(t.sum(t.add(weighted, d.logvar_x)), 0.5);
            } else {
                recon = t.scale(t.squared_error(x, d.mu_x), 0.5);
            }
            out.ae_total = t.add(kl, recon);
            break;
        }
        case AeMode::None:
            break;
    }
    out.ae_built = out.ae_total.valid();
    return out;
}

// ---- inference-level wrappers ----------------------------------------------

/// Deterministic feature extraction: latent codes for a frame batch with
/// dropout off; the VAE contributes its posterior mean.
inline Tensor encode_features(const ModelParams& params, const Tensor& frames) {
    Tape t;
    TapeModel m = TapeModel::leaf_all(t, params);
    Rng rng(0);
    FeaturePipeline p = build_features(t, m, params.config, frames, rng, /*training=*/false,
                                       /*with_ae_loss=*/false);
    return t.value(p.seq_features);
}

/// Reparameterized VAE sample for a frame batch.  With eps forced to zero
/// the sample equals the posterior mean exactly.
struct VaeSample {
    Tensor mu, logvar, z;
};

inline VaeSample encode_vae_sample(const ModelParams& params, const Tensor& frames, std::uint64_t seed) {
    if (params.config.mode != AeMode::Vae) {
        throw std::invalid_argument("encode_vae_sample: model is not in VAE mode");
    }
    Tape t;
    TapeModel m = TapeModel::leaf_all(t, params);
    Rng rng(seed);
    EncodeVars e = build_encoder(t, m, params.config, t.constant(frames), rng, false);
    VaeSample s;
    s.mu = t.value(e.mu);
    s.logvar = t.value(e.logvar);
    Rng er = rng.split("eps");
    s.z = s.mu;
    for (std::size_t i = 0; i < s.z.size(); ++i) {
        s.z[i] += std::exp(0.5 * s.logvar[i]) * er.normal();
    }
    return s;
}

/// The full VAE objective for a frame batch (total over frames): KL plus the
/// unit-variance reconstruction term with one sample, dropout off.
inline double vae_loss(const ModelParams& params, const Tensor& frames, std::uint64_t seed) {
    if (params.config.mode != AeMode::Vae) {
        throw std::invalid_argument("vae_loss: model is not in VAE mode");
    }
    Tape t;
    TapeModel m = TapeModel::leaf_all(t, params);
    Rng rng(seed);
    FeaturePipeline p = build_features(t, m, params.config, frames, rng, /*training=*/false,
                                       /*with_ae_loss=*/true);
    return t.value(p.ae_total)[0];
}

}  // namespace fsrec::nn
