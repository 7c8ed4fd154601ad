#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "fsrec/autoencoder.hpp"
#include "fsrec/model.hpp"
#include "fsrec/tape.hpp"

namespace fsrec::nn {

struct LstmState {
    Var h, c;
};

/// Standard LSTM update: input/forget/output gates plus tanh candidate.
inline LstmState lstm_step(Tape& t, const TapeModel::Lstm& p, Var x, const LstmState& prev) {
    auto gate_pre = [&](Var wx, Var wh, Var b) {
        return t.add(t.add(t.matmul(x, wx), t.matmul(prev.h, wh)), b);
    };
    Var i = t.sigmoid(gate_pre(p.wx_i, p.wh_i, p.b_i));
    Var f = t.sigmoid(gate_pre(p.wx_f, p.wh_f, p.b_f));
    Var o = t.sigmoid(gate_pre(p.wx_o, p.wh_o, p.b_o));
    Var g = t.tanh(gate_pre(p.wx_g, p.wh_g, p.b_g));
    LstmState next;
    next.c = t.add(t.mul(f, prev.c), t.mul(i, g));
    next.h = t.mul(o, t.tanh(next.c));
    return next;
}

/// Left-to-right encoding of a latent sequence (rows of z) from a zero
/// initial state.  Also precomputes the attention projections of every
/// encoder state, which are decoder-independent.
struct EncodedSequence {
    std::vector<Var> states;  // h_1..h_S
    std::vector<Var> proj;    // W_h h_i
    LstmState final_state;
};

inline EncodedSequence encode_sequence(Tape& t, const TapeModel& m, const ModelConfig& cfg, Var z) {
    const Tensor& Z = t.value(z);
    if (Z.ndim() != 2 || Z.shape()[0] < 1) {
        throw std::invalid_argument("encode_sequence: expected a nonempty rank-2 latent sequence");
    }
    std::size_t s = Z.shape()[0];
    LstmState state{t.constant(Tensor::zeros({cfg.lstm_hidden})),
                    t.constant(Tensor::zeros({cfg.lstm_hidden}))};
    EncodedSequence out;
    out.states.reserve(s);
    out.proj.reserve(s);
    for (std::size_t i = 0; i < s; ++i) {
        state = lstm_step(t, m.enc_lstm, t.row(z, i), state);
        out.states.push_back(state.h);
        out.proj.push_back(t.matmul(state.h, m.attn.w_h));
    }
    out.final_state = state;
    return out;
}

/// Additive attention over encoder states for one decoder state:
/// alpha_i = softmax_i(v . tanh(W_h h_i + W_d d)), context = sum_i alpha_i h_i.
struct AttendVars {
    Var alpha;    // (S)
    Var context;  // (lstm_hidden)
};

inline AttendVars attend(Tape& t, const TapeModel::Attn& p, std::span<const Var> states,
                         std::span<const Var> proj, Var d) {
    if (states.empty()) throw std::invalid_argument("attend: no encoder states");
    Var q = t.matmul(d, p.w_d);
    Var scores;
    for (std::size_t i = 0; i < states.size(); ++i) {
        Var pi = i < proj.size() ? proj[i] : t.matmul(states[i], p.w_h);
        Var si = t.sum(t.mul(t.tanh(t.add(pi, q)), p.v));
        scores = i == 0 ? si : t.concat(scores, si);
    }
    AttendVars out;
    out.alpha = t.softmax(scores);
    for (std::size_t i = 0; i < states.size(); ++i) {
        Tensor onehot({states.size()});
        onehot[i] = 1.0;
        Var ai = t.sum(t.mul(out.alpha, t.constant(std::move(onehot))));
        Var weighted = t.mul(states[i], ai);
        out.context = i == 0 ? weighted : t.add(out.context, weighted);
    }
    return out;
}

/// One decoder step: embed the previous letter, advance the decoder LSTM,
/// attend over the encoder states, and emit the letter distribution
/// softmax(W_o [d_t; d'_t] + b_o).  probs is exp(log_probs) so the loss and
/// decoding paths share one computation.
struct DecoderStepVars {
    Var log_probs;  // (vocab)
    Var probs;      // (vocab)
    LstmState state;
    Var alpha;  // (S)
};

inline DecoderStepVars decoder_step(Tape& t, const TapeModel& m, const ModelConfig& cfg, int prev_id,
                                    const LstmState& prev, const EncodedSequence& enc) {
    if (prev_id < 0 || prev_id >= static_cast<int>(cfg.vocab_size())) {
        throw std::invalid_argument("decoder_step: letter id " + std::to_string(prev_id) +
                                    " outside vocabulary of size " + std::to_string(cfg.vocab_size()));
    }
    DecoderStepVars out;
    Var emb = t.row(m.embedding, static_cast<std::size_t>(prev_id));
    out.state = lstm_step(t, m.dec_lstm, emb, prev);
    AttendVars att = attend(t, m.attn, enc.states, enc.proj, out.state.h);
    out.alpha = att.alpha;
    Var logits = t.affine(t.concat(out.state.h, att.context), m.out.w_o, m.out.b_o);
    out.log_probs = t.log_softmax(logits);
    out.probs = t.exp(out.log_probs);
    return out;
}

/// Teacher-forced negative log-likelihood, averaged over the target
/// positions (the letters plus the end symbol).  The decoder starts from the
/// final encoder state and is fed the start symbol, then the ground truth.
struct SequenceLoss {
    Var nll;
    std::vector<Var> step_log_probs;
    std::vector<Var> alphas;
};

inline SequenceLoss build_sequence_nll(Tape& t, const TapeModel& m, const ModelConfig& cfg,
                                       const EncodedSequence& enc, const std::vector<int>& letters) {
    if (letters.empty()) throw std::invalid_argument("sequence_nll: empty letter sequence");
    Vocab vocab = cfg.vocab();
    for (int id : letters) {
        if (!vocab.is_letter(id)) {
            throw std::invalid_argument("sequence_nll: target id " + std::to_string(id) + " is not a letter");
        }
    }
    std::vector<int> targets = letters;
    targets.push_back(vocab.end_id());

    SequenceLoss out;
    LstmState state = enc.final_state;
    int prev = vocab.start_id();
    Var acc;
    for (std::size_t k = 0; k < targets.size(); ++k) {
        DecoderStepVars step = decoder_step(t, m, cfg, prev, state, enc);
        out.step_log_probs.push_back(step.log_probs);
        out.alphas.push_back(step.alpha);
        Var nll_k = t.nll_pick(step.log_probs, static_cast<std::size_t>(targets[k]));
        acc = k == 0 ? nll_k : t.add(acc, nll_k);
        state = step.state;
        prev = targets[k];
    }
    out.nll = t.scale(acc, 1.0 / static_cast<double>(targets.size()));
    return out;
}

/// The complete objective: teacher-forced NLL plus lambda_ae times the mean
/// per-frame auto-encoder loss of the configured mode.  With lambda_ae = 0
/// (or mode none) the auto-encoder branch is never built and the total is
/// the sequence NLL itself.
struct MultitaskLoss {
    Var total;
    Var nll;
    Var ae_mean;  // valid only when the branch was built
    bool ae_built = false;
    SequenceLoss seq;
    FeaturePipeline features;
};

inline MultitaskLoss build_multitask_loss(Tape& t, const TapeModel& m, const ModelConfig& cfg,
                                          const Tensor& frames, const std::vector<int>& letters, Rng& rng,
                                          bool training, const Tensor* forced_eps = nullptr) {
    if (cfg.lambda_ae < 0.0) throw std::invalid_argument("multitask_loss: lambda_ae must be >= 0");
    bool with_ae = cfg.mode != AeMode::None && cfg.lambda_ae > 0.0;
    MultitaskLoss out;
    out.features = build_features(t, m, cfg, frames, rng, training, with_ae, forced_eps);
    EncodedSequence enc = encode_sequence(t, m, cfg, out.features.seq_features);
    out.seq = build_sequence_nll(t, m, cfg, enc, letters);
    out.nll = out.seq.nll;
    if (out.features.ae_built) {
        double s = static_cast<double>(frames.shape()[0]);
        out.ae_mean = t.scale(out.features.ae_total, 1.0 / s);
        out.total = t.add(out.nll, t.scale(out.ae_mean, cfg.lambda_ae));
        out.ae_built = true;
    } else {
        out.total = out.nll;
    }
    return out;
}

// ---- value-level wrappers (tests and small tools) ---------------------------

inline std::pair<Tensor, Tensor> lstm_step_value(const LstmParams& p, const Tensor& x, const Tensor& h,
                                                 const Tensor& c) {
    Tape t;
    TapeModel::Lstm vars;
    auto lf = [&](const Tensor& w) { return t.leaf(w); };
    vars = {lf(p.wx_i), lf(p.wh_i), lf(p.b_i), lf(p.wx_f), lf(p.wh_f), lf(p.b_f),
            lf(p.wx_o), lf(p.wh_o), lf(p.b_o), lf(p.wx_g), lf(p.wh_g), lf(p.b_g)};
    LstmState s = lstm_step(t, vars, t.leaf(x), {t.leaf(h), t.leaf(c)});
    return {t.value(s.h), t.value(s.c)};
}

inline std::pair<Tensor, Tensor> attend_value(const AttentionParams& p, const std::vector<Tensor>& states,
                                              const Tensor& d) {
    Tape t;
    TapeModel::Attn vars{t.leaf(p.v), t.leaf(p.w_h), t.leaf(p.w_d)};
    std::vector<Var> hs;
    hs.reserve(states.size());
    for (const Tensor& h : states) hs.push_back(t.leaf(h));
    AttendVars a = attend(t, vars, hs, {}, t.leaf(d));
    return {t.value(a.alpha), t.value(a.context)};
}

/// Encoder states for a latent sequence as plain tensors (inference).
inline std::vector<Tensor> encode_sequence_value(const ModelParams& params, const Tensor& z) {
    Tape t;
    TapeModel m = TapeModel::leaf_all(t, params);
    EncodedSequence enc = encode_sequence(t, m, params.config, t.constant(z));
    std::vector<Tensor> out;
    out.reserve(enc.states.size());
    for (Var v : enc.states) out.push_back(t.value(v));
    return out;
}

inline double sequence_nll_value(const ModelParams& params, const Tensor& frames,
                                 const std::vector<int>& letters, std::uint64_t seed, bool training = false) {
    Tape t;
    TapeModel m = TapeModel::leaf_all(t, params);
    Rng rng(seed);
    FeaturePipeline f = build_features(t, m, params.config, frames, rng, training, false);
    EncodedSequence enc = encode_sequence(t, m, params.config, f.seq_features);
    SequenceLoss seq = build_sequence_nll(t, m, params.config, enc, letters);
    return t.value(seq.nll)[0];
}

inline double multitask_loss_value(const ModelParams& params, const Tensor& frames,
                                   const std::vector<int>& letters, std::uint64_t seed,
                                   bool training = false) {
    Tape t;
    TapeModel m = TapeModel::leaf_all(t, params);
    Rng rng(seed);
    MultitaskLoss loss = build_multitask_loss(t, m, params.config, frames, letters, rng, training);
    return t.value(loss.total)[0];
}

}  // namespace fsrec::nn
