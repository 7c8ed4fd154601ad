#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "fsrec/seq2seq.hpp"

namespace fsrec::dec {

using nn::ModelParams;
using num::Tensor;

/// Forward-only scorer over one frame sequence.  Feature extraction and the
/// encoder run once in the constructor; decoder steps append to the same
/// tape, so the loss path and the decoding path share every computation.
class SequenceScorer {
public:
    SequenceScorer(const ModelParams& params, const Tensor& frames) : cfg_(params.config) {
        model_ = nn::TapeModel::leaf_all(tape_, params);
        num::Rng rng(0);
        nn::FeaturePipeline f =
            nn::build_features(tape_, model_, cfg_, frames, rng, /*training=*/false, /*with_ae_loss=*/false);
        enc_ = nn::encode_sequence(tape_, model_, cfg_, f.seq_features);
    }

    const nn::ModelConfig& config() const { return cfg_; }
    std::size_t num_frames() const { return enc_.states.size(); }
    nn::LstmState initial_state() const { return enc_.final_state; }

    struct Step {
        Tensor log_probs;
        Tensor alpha;
        nn::LstmState state;
    };

    Step step(int prev_id, const nn::LstmState& prev) {
        nn::DecoderStepVars out = nn::decoder_step(tape_, model_, cfg_, prev_id, prev, enc_);
        return {tape_.value(out.log_probs), tape_.value(out.alpha), out.state};
    }

    std::pair<Tensor, Tensor> state_values(const nn::LstmState& s) const {
        return {tape_.value(s.h), tape_.value(s.c)};
    }

private:
    num::Tape tape_;
    nn::ModelConfig cfg_;
    nn::TapeModel model_;
    nn::EncodedSequence enc_;
};

/// A partial or complete decode: the letter prefix, its accumulated
/// log-probability (the exact sum of the chosen per-step log-probabilities),
/// the decoder state it ended in, and the attention row recorded at each
/// emitted symbol.  Finished hypotheses are never extended.
struct Hypothesis {
    std::vector<int> letters;
    double log_prob = 0.0;
    bool finished = false;
    Tensor h, c;
    std::vector<Tensor> alphas;
};

namespace detail {

// Ranking: higher log-probability first; ties broken lexicographically over
// the emitted id sequence with the end symbol counting as the final id, so
// beam ranking agrees with greedy's lowest-index argmax.
inline bool ranks_before(const std::vector<int>& la, bool fa, double pa, const std::vector<int>& lb,
                         bool fb, double pb, int end_id) {
    if (pa != pb) return pa > pb;
    std::size_t na = la.size() + (fa ? 1 : 0);
    std::size_t nb = lb.size() + (fb ? 1 : 0);
    for (std::size_t i = 0; i < std::min(na, nb); ++i) {
        int a = i < la.size() ? la[i] : end_id;
        int b = i < lb.size() ? lb[i] : end_id;
        if (a != b) return a < b;
    }
    return na < nb;
}

struct BeamItem {
    std::vector<int> letters;
    double log_prob = 0.0;
    bool finished = false;
    nn::LstmState state;
    std::vector<Tensor> alphas;
};

}  // namespace detail

/// Breadth-limited best-first search keeping the beam_width highest-scoring
/// hypotheses per step.  Finished hypotheses stay in the beam and compete
/// without being extended.  Returns all surviving hypotheses ranked best
/// first.
inline std::vector<Hypothesis> beam_decode(const ModelParams& params, const Tensor& frames,
                                           std::size_t beam_width, std::size_t max_len = 20) {
    if (beam_width < 1) throw std::invalid_argument("beam_decode: beam width must be >= 1");
    if (max_len < 1) throw std::invalid_argument("beam_decode: max_len must be >= 1");
    SequenceScorer scorer(params, frames);
    const Vocab vocab = params.config.vocab();
    const int end = vocab.end_id();

    std::vector<detail::BeamItem> beam(1);
    beam[0].state = scorer.initial_state();

    for (std::size_t step = 0; step < max_len; ++step) {
        bool any_open = std::any_of(beam.begin(), beam.end(),
                                    [](const detail::BeamItem& b) { return !b.finished; });
        if (!any_open) break;
        std::vector<detail::BeamItem> candidates;
        candidates.reserve(beam.size() * (vocab.num_letters + 1));
        for (detail::BeamItem& item : beam) {
            if (item.finished) {
                candidates.push_back(std::move(item));
                continue;
            }
            int prev = item.letters.empty() ? vocab.start_id() : item.letters.back();
            SequenceScorer::Step out = scorer.step(prev, item.state);
            for (std::size_t id = 0; id < vocab.num_letters; ++id) {
                detail::BeamItem next = item;
                next.letters.push_back(static_cast<int>(id));
                next.log_prob += out.log_probs[id];
                next.state = out.state;
                next.alphas.push_back(out.alpha);
                candidates.push_back(std::move(next));
            }
            detail::BeamItem done = std::move(item);
            done.finished = true;
            done.log_prob += out.log_probs[static_cast<std::size_t>(end)];
            done.state = out.state;
            done.alphas.push_back(out.alpha);
            candidates.push_back(std::move(done));
        }
        std::sort(candidates.begin(), candidates.end(),
                  [&](const detail::BeamItem& a, const detail::BeamItem& b) {
                      return detail::ranks_before(a.letters, a.finished, a.log_prob, b.letters, b.finished,
                                                  b.log_prob, end);
                  });
        if (candidates.size() > beam_width) candidates.resize(beam_width);
        beam = std::move(candidates);
    }

    std::vector<Hypothesis> out;
    out.reserve(beam.size());
    for (detail::BeamItem& item : beam) {
        Hypothesis h;
        h.letters = std::move(item.letters);
        h.log_prob = item.log_prob;
        h.finished = item.finished;
        h.alphas = std::move(item.alphas);
        if (item.state.h.valid()) std::tie(h.h, h.c) = scorer.state_values(item.state);
        out.push_back(std::move(h));
    }
    return out;
}

/// Greedy decoding: the argmax letter at every step (lowest index on ties),
/// stopping at the end symbol or max_len.
inline std::vector<int> greedy_decode(const ModelParams& params, const Tensor& frames,
                                      std::size_t max_len = 20) {
    if (max_len < 1) throw std::invalid_argument("greedy_decode: max_len must be >= 1");
    SequenceScorer scorer(params, frames);
    const Vocab vocab = params.config.vocab();
    nn::LstmState state = scorer.initial_state();
    int prev = vocab.start_id();
    std::vector<int> letters;
    for (std::size_t step = 0; step < max_len; ++step) {
        SequenceScorer::Step out = scorer.step(prev, state);
        // argmax over letters and end; the start symbol is never emitted
        int best = 0;
        double best_lp = out.log_probs[0];
        for (std::size_t id = 1; id < vocab.num_letters; ++id) {
            if (out.log_probs[id] > best_lp) {
                best_lp = out.log_probs[id];
                best = static_cast<int>(id);
            }
        }
        if (out.log_probs[static_cast<std::size_t>(vocab.end_id())] > best_lp) break;
        letters.push_back(best);
        prev = best;
        state = out.state;
    }
    return letters;
}

/// Exhaustive search over every letter sequence up to max_len (test oracle).
/// Sequences shorter than max_len are scored with their end-symbol
/// probability; sequences of exactly max_len are scored without it, matching
/// how the beam scores hypotheses that hit the length cap.
inline std::vector<int> exhaustive_decode(const ModelParams& params, const Tensor& frames,
                                          std::size_t max_len = 3) {
    const Vocab vocab = params.config.vocab();
    double space = std::pow(static_cast<double>(vocab.num_letters), static_cast<double>(max_len));
    if (space > 1e6) {
        throw std::invalid_argument("exhaustive_decode: search space above 1e6 sequences");
    }
    SequenceScorer scorer(params, frames);
    const int end = vocab.end_id();

    std::vector<int> best_letters;
    bool best_finished = false;
    double best_lp = -std::numeric_limits<double>::infinity();
    bool have_best = false;

    auto consider = [&](const std::vector<int>& letters, bool finished, double lp) {
        if (!have_best ||
            detail::ranks_before(letters, finished, lp, best_letters, best_finished, best_lp, end)) {
            best_letters = letters;
            best_finished = finished;
            best_lp = lp;
            have_best = true;
        }
    };

    std::vector<int> prefix;
    auto dfs = [&](auto&& self, int prev, const nn::LstmState& state, double lp) -> void {
        if (prefix.size() == max_len) {
            consider(prefix, false, lp);
            return;
        }
        SequenceScorer::Step out = scorer.step(prev, state);
        consider(prefix, true, lp + out.log_probs[static_cast<std::size_t>(end)]);
        for (std::size_t id = 0; id < vocab.num_letters; ++id) {
            prefix.push_back(static_cast<int>(id));
            self(self, static_cast<int>(id), out.state, lp + out.log_probs[id]);
            prefix.pop_back();
        }
    };
    dfs(dfs, vocab.start_id(), scorer.initial_state(), 0.0);
    return best_letters;
}

}  // namespace fsrec::dec
