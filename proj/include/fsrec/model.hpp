#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fsrec/gradcheck.hpp"
#include "fsrec/init.hpp"
#include "fsrec/rng.hpp"
#include "fsrec/tape.hpp"
#include "fsrec/tensor.hpp"
#include "fsrec/vocab.hpp"

namespace fsrec::nn {

using num::Rng;
using num::Tape;
using num::Tensor;
using num::Var;

/// Which feature extractor the model trains.  None means the encoder MLP
/// feeds the sequence model directly with no reconstruction objective.
enum class AeMode { Ae, Dae, Vae, None };

inline const char* to_string(AeMode m) {
    switch (m) {
        case AeMode::Ae: return "ae";
        case AeMode::Dae: return "dae";
        case AeMode::Vae: return "vae";
        case AeMode::None: return "none";
    }
    return "?";
}

enum class CorruptionKind { Masking, Gaussian };

/// Architecture plus the loss options that shape the parameter set.
struct ModelConfig {
    std::size_t image_dim = 4096;  // flattened input frame
    std::size_t mlp_hidden = 800;
    std::size_t latent_dim = 100;
    std::size_t lstm_hidden = 128;
    std::size_t embed_dim = 128;
    std::size_t attn_dim = 128;
    std::size_t num_letters = 26;

    AeMode mode = AeMode::Vae;
    double lambda_ae = 1.0;
    double dropout_retain = 0.8;
    double logvar_clamp = 8.0;
    CorruptionKind dae_corruption = CorruptionKind::Masking;
    double dae_strength = 0.25;
    bool vae_learned_output_variance = false;

    Vocab vocab() const { return Vocab{num_letters}; }
    std::size_t vocab_size() const { return num_letters + 2; }
    bool has_ae_decoder() const { return mode != AeMode::None; }
    bool has_vae_heads() const { return mode == AeMode::Vae; }

    bool same_architecture(const ModelConfig& o) const {
        return image_dim == o.image_dim && mlp_hidden == o.mlp_hidden && latent_dim == o.latent_dim &&
               lstm_hidden == o.lstm_hidden && embed_dim == o.embed_dim && attn_dim == o.attn_dim &&
               num_letters == o.num_letters && mode == o.mode &&
               vae_learned_output_variance == o.vae_learned_output_variance;
    }
};

// Two hidden ReLU layers, then one latent head (two for the VAE).
struct EncoderParams {
    Tensor w1, b1, w2, b2;
    Tensor w_mu, b_mu;
    Tensor w_logvar, b_logvar;  // VAE only
};

// Mirror of the encoder, back up to image size.
struct DecoderParams {
    Tensor w1, b1, w2, b2;
    Tensor w_out, b_out;
    Tensor w_logvar_out, b_logvar_out;  // learned output variance only
};

// One LSTM layer; separate weight matrices and bias per gate.
struct LstmParams {
    Tensor wx_i, wh_i, b_i;
    Tensor wx_f, wh_f, b_f;
    Tensor wx_o, wh_o, b_o;
    Tensor wx_g, wh_g, b_g;
};

struct AttentionParams {
    Tensor v;    // (attn_dim)
    Tensor w_h;  // encoder state projection (lstm_hidden x attn_dim)
    Tensor w_d;  // decoder state projection (lstm_hidden x attn_dim)
};

struct OutputParams {
    Tensor w_o;  // ([d_t; d'_t] -> vocab, 2*lstm_hidden x vocab)
    Tensor b_o;
};

/// All named parameter tensors of the joint model.  Iteration order is
/// fixed, so optimizers, checkpoints and gradient extraction stay aligned.
struct ModelParams {
    ModelConfig config;
    EncoderParams enc;
    DecoderParams dec;
    LstmParams enc_lstm;
    LstmParams dec_lstm;
    Tensor embedding;  // (vocab_size x embed_dim)
    AttentionParams attn;
    OutputParams out;

    static ModelParams init(const ModelConfig& cfg, std::uint64_t seed) {
        ModelParams p;
        p.config = cfg;
        Rng root(seed);
        auto weight = [&](const char* name, std::size_t r, std::size_t c) {
            return num::xavier_init({r, c}, root.split("init").split(name));
        };
        auto vec = [&](const char* name, std::size_t n) {
            return num::xavier_init({n}, root.split("init").split(name));
        };
        std::size_t dx = cfg.image_dim, h = cfg.mlp_hidden, dz = cfg.latent_dim;
        std::size_t hh = cfg.lstm_hidden, de = cfg.embed_dim, da = cfg.attn_dim, nv = cfg.vocab_size();

        p.enc.w1 = weight("enc.w1", dx, h);
        p.enc.b1 = Tensor::zeros({h});
        p.enc.w2 = weight("enc.w2", h, h);
        p.enc.b2 = Tensor::zeros({h});
        p.enc.w_mu = weight("enc.w_mu", h, dz);
        p.enc.b_mu = Tensor::zeros({dz});
        if (cfg.has_vae_heads()) {
            p.enc.w_logvar = weight("enc.w_logvar", h, dz);
            p.enc.b_logvar = Tensor::zeros({dz});
        }
        if (cfg.has_ae_decoder()) {
            p.dec.w1 = weight("dec.w1", dz, h);
            p.dec.b1 = Tensor::zeros({h});
            p.dec.w2 = weight("dec.w2", h, h);
            p.dec.b2 = Tensor::zeros({h});
            p.dec.w_out = weight("dec.w_out", h, dx);
            p.dec.b_out = Tensor::zeros({dx});
            if (cfg.mode == AeMode::Vae && cfg.vae_learned_output_variance) {
                p.dec.w_logvar_out = weight("dec.w_logvar_out", h, dx);
                p.dec.b_logvar_out = Tensor::zeros({dx});
            }
        }
        auto init_lstm = [&](LstmParams& l, const char* prefix, std::size_t in_dim) {
            std::string pre(prefix);
            auto w = [&](const char* g, std::size_t r, std::size_t c) {
                return num::xavier_init({r, c}, root.split("init").split(pre + g));
            };
            l.wx_i = w(".wx_i", in_dim, hh);
            l.wh_i = w(".wh_i", hh, hh);
            l.b_i = Tensor::zeros({hh});
            l.wx_f = w(".wx_f", in_dim, hh);
            l.wh_f = w(".wh_f", hh, hh);
            l.b_f = Tensor::zeros({hh});
            l.wx_o = w(".wx_o", in_dim, hh);
            l.wh_o = w(".wh_o", hh, hh);
            l.b_o = Tensor::zeros({hh});
            l.wx_g = w(".wx_g", in_dim, hh);
            l.wh_g = w(".wh_g", hh, hh);
            l.b_g = Tensor::zeros({hh});
        };
        init_lstm(p.enc_lstm, "enc_lstm", dz);
        init_lstm(p.dec_lstm, "dec_lstm", de);
        p.embedding = weight("embedding", nv, de);
        p.attn.v = vec("attn.v", da);
        p.attn.w_h = weight("attn.w_h", hh, da);
        p.attn.w_d = weight("attn.w_d", hh, da);
        p.out.w_o = weight("out.w_o", 2 * hh, nv);
        p.out.b_o = Tensor::zeros({nv});
        return p;
    }

    /// Visits every allocated parameter as (name, tensor) in a fixed order.
    template <typename Self, typename Fn>
    static void visit(Self& self, Fn&& fn) {
        const ModelConfig& cfg = self.config;
        fn("enc.w1", self.enc.w1);
        fn("enc.b1", self.enc.b1);
        fn("enc.w2", self.enc.w2);
        fn("enc.b2", self.enc.b2);
        fn("enc.w_mu", self.enc.w_mu);
        fn("enc.b_mu", self.enc.b_mu);
        if (cfg.has_vae_heads()) {
            fn("enc.w_logvar", self.enc.w_logvar);
            fn("enc.b_logvar", self.enc.b_logvar);
        }
        if (cfg.has_ae_decoder()) {
            fn("dec.w1", self.dec.w1);
            fn("dec.b1", self.dec.b1);
            fn("dec.w2", self.dec.w2);
            fn("dec.b2", self.dec.b2);
            fn("dec.w_out", self.dec.w_out);
            fn("dec.b_out", self.dec.b_out);
            if (cfg.mode == AeMode::Vae && cfg.vae_learned_output_variance) {
                fn("dec.w_logvar_out", self.dec.w_logvar_out);
                fn("dec.b_logvar_out", self.dec.b_logvar_out);
            }
        }
        auto visit_lstm = [&](auto& l, const std::string& pre) {
            fn((pre + ".wx_i").c_str(), l.wx_i);
            fn((pre + ".wh_i").c_str(), l.wh_i);
            fn((pre + ".b_i").c_str(), l.b_i);
            fn((pre + ".wx_f").c_str(), l.wx_f);
            fn((pre + ".wh_f").c_str(), l.wh_f);
            fn((pre + ".b_f").c_str(), l.b_f);
            fn((pre + ".wx_o").c_str(), l.wx_o);
            fn((pre + ".wh_o").c_str(), l.wh_o);
            fn((pre + ".b_o").c_str(), l.b_o);
            fn((pre + ".wx_g").c_str(), l.wx_g);
            fn((pre + ".wh_g").c_str(), l.wh_g);
            fn((pre + ".b_g").c_str(), l.b_g);
        };
        visit_lstm(self.enc_lstm, "enc_lstm");
        visit_lstm(self.dec_lstm, "dec_lstm");
        fn("embedding", self.embedding);
        fn("attn.v", self.attn.v);
        fn("attn.w_h", self.attn.w_h);
        fn("attn.w_d", self.attn.w_d);
        fn("out.w_o", self.out.w_o);
        fn("out.b_o", self.out.b_o);
    }

    std::vector<num::NamedTensor> named() {
        std::vector<num::NamedTensor> list;
        visit(*this, [&](const char* name, Tensor& t) { list.push_back({name, &t}); });
        return list;
    }

    std::vector<std::pair<std::string, const Tensor*>> named() const {
        std::vector<std::pair<std::string, const Tensor*>> list;
        visit(*this, [&](const char* name, const Tensor& t) { list.emplace_back(name, &t); });
        return list;
    }

    /// The auto-encoder subset: everything updated during unlabeled
    /// pretraining.
    std::vector<num::NamedTensor> feature_named() {
        std::vector<num::NamedTensor> list;
        visit(*this, [&](const char* name, Tensor& t) {
            std::string n(name);
            if (n.rfind("enc.", 0) == 0 || n.rfind("dec.", 0) == 0) list.push_back({n, &t});
        });
        return list;
    }
};

/// Var mirrors of the parameter structs, leafed onto one tape.  ordered
/// lines up with ModelParams::named() so gradients read back positionally.
struct TapeModel {
    struct Enc {
        Var w1, b1, w2, b2, w_mu, b_mu, w_logvar, b_logvar;
    } enc;
    struct Dec {
        Var w1, b1, w2, b2, w_out, b_out, w_logvar_out, b_logvar_out;
    } dec;
    struct Lstm {
        Var wx_i, wh_i, b_i, wx_f, wh_f, b_f, wx_o, wh_o, b_o, wx_g, wh_g, b_g;
    } enc_lstm, dec_lstm;
    Var embedding;
    struct Attn {
        Var v, w_h, w_d;
    } attn;
    struct Out {
        Var w_o, b_o;
    } out;
    std::vector<Var> ordered;

    static TapeModel leaf_all(Tape& tape, const ModelParams& p) {
        TapeModel m;
        std::vector<std::pair<std::string, Var*>> slots = {
            {"enc.w1", &m.enc.w1},
            {"enc.b1", &m.enc.b1},
            {"enc.w2", &m.enc.w2},
            {"enc.b2", &m.enc.b2},
            {"enc.w_mu", &m.enc.w_mu},
            {"enc.b_mu", &m.enc.b_mu},
            {"enc.w_logvar", &m.enc.w_logvar},
            {"enc.b_logvar", &m.enc.b_logvar},
            {"dec.w1", &m.dec.w1},
            {"dec.b1", &m.dec.b1},
            {"dec.w2", &m.dec.w2},
            {"dec.b2", &m.dec.b2},
            {"dec.w_out", &m.dec.w_out},
            {"dec.b_out", &m.dec.b_out},
            {"dec.w_logvar_out", &m.dec.w_logvar_out},
            {"dec.b_logvar_out", &m.dec.b_logvar_out},
            {"enc_lstm.wx_i", &m.enc_lstm.wx_i},
            {"enc_lstm.wh_i", &m.enc_lstm.wh_i},
            {"enc_lstm.b_i", &m.enc_lstm.b_i},
            {"enc_lstm.wx_f", &m.enc_lstm.wx_f},
            {"enc_lstm.wh_f", &m.enc_lstm.wh_f},
            {"enc_lstm.b_f", &m.enc_lstm.b_f},
            {"enc_lstm.wx_o", &m.enc_lstm.wx_o},
            {"enc_lstm.wh_o", &m.enc_lstm.wh_o},
            {"enc_lstm.b_o", &m.enc_lstm.b_o},
            {"enc_lstm.wx_g", &m.enc_lstm.wx_g},
            {"enc_lstm.wh_g", &m.enc_lstm.wh_g},
            {"enc_lstm.b_g", &m.enc_lstm.b_g},
            {"dec_lstm.wx_i", &m.dec_lstm.wx_i},
            {"dec_lstm.wh_i", &m.dec_lstm.wh_i},
            {"dec_lstm.b_i", &m.dec_lstm.b_i},
            {"dec_lstm.wx_f", &m.dec_lstm.wx_f},
            {"dec_lstm.wh_f", &m.dec_lstm.wh_f},
            {"dec_lstm.b_f", &m.dec_lstm.b_f},
            {"dec_lstm.wx_o", &m.dec_lstm.wx_o},
            {"dec_lstm.wh_o", &m.dec_lstm.wh_o},
            {"dec_lstm.b_o", &m.dec_lstm.b_o},
            {"dec_lstm.wx_g", &m.dec_lstm.wx_g},
            {"dec_lstm.wh_g", &m.dec_lstm.wh_g},
            {"dec_lstm.b_g", &m.dec_lstm.b_g},
            {"embedding", &m.embedding},
            {"attn.v", &m.attn.v},
            {"attn.w_h", &m.attn.w_h},
            {"attn.w_d", &m.attn.w_d},
            {"out.w_o", &m.out.w_o},
            {"out.b_o", &m.out.b_o},
        };
        ModelParams::visit(p, [&](const char* name, const Tensor& t) {
            Var v = tape.leaf(t, true);
            m.ordered.push_back(v);
            for (auto& [slot_name, slot] : slots) {
                if (slot_name == name) {
                    *slot = v;
                    return;
                }
            }
            throw std::invalid_argument(std::string("leaf_all: unknown parameter ") + name);
        });
        return m;
    }

    /// Gradients in ModelParams::named() order; call after tape.backward().
    std::vector<Tensor> gradients(const Tape& tape) const {
        std::vector<Tensor> g;
        g.reserve(ordered.size());
        for (Var v : ordered) g.push_back(tape.grad(v));
        return g;
    }
};

}  // namespace fsrec::nn
