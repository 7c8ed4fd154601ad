#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fsrec/adam.hpp"
#include "fsrec/dataset.hpp"
#include "fsrec/decode.hpp"
#include "fsrec/errors.hpp"
#include "fsrec/metrics.hpp"
#include "fsrec/seq2seq.hpp"
#include "fsrec/splits.hpp"

namespace fsrec::train {

using nn::ModelParams;
using num::Rng;
using num::Tensor;

struct TrainConfig {
    std::size_t batch_size = 8;  // word instances; frames for pretraining
    double learning_rate = 0.001;
    double decay_factor = 0.9;
    std::size_t patience = 3;
    double lr_floor = 1e-5;
    std::size_t max_epochs = 30;
    double grad_clip = 5.0;  // global norm; 0 disables
    std::uint64_t seed = 1;
    std::size_t max_decode_len = 20;

    void validate() const {
        if (batch_size < 1) throw std::invalid_argument("train config: batch_size must be >= 1");
        if (decay_factor <= 0.0 || decay_factor >= 1.0) {
            throw std::invalid_argument("train config: decay_factor must be in (0, 1)");
        }
        if (patience < 1) throw std::invalid_argument("train config: patience must be >= 1");
        if (learning_rate <= 0.0) throw std::invalid_argument("train config: learning_rate must be > 0");
    }
};

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_letter_accuracy = 0.0;
    double learning_rate = 0.0;
    double millis = 0.0;
};

struct TrainReport {
    std::vector<EpochRecord> epochs;
    std::size_t ae_loss_evaluations = 0;
    std::vector<int> signers_accessed;  // sorted unique
    double final_val_letter_accuracy = 0.0;

    std::string to_tsv() const {
        std::ostringstream out;
        out << "epoch\ttrain_loss\tval_letter_accuracy\tlearning_rate\tmillis\n";
        for (const EpochRecord& e : epochs) {
            out << e.epoch << "\t" << e.train_loss << "\t" << e.val_letter_accuracy << "\t"
                << e.learning_rate << "\t" << e.millis << "\n";
        }
        return out.str();
    }
};

struct TrainResult {
    ModelParams params;
    TrainReport report;
};

namespace detail {

inline double now_ms() {
    using namespace std::chrono;
    return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

inline void check_finite_loss(double loss) {
    if (!std::isfinite(loss)) throw NumericError("training loss is not finite");
}

// Positions of one named subset within the full named() order.
inline std::vector<std::size_t> subset_positions(ModelParams& params,
                                                 const std::vector<num::NamedTensor>& subset) {
    auto full = params.named();
    std::vector<std::size_t> pos;
    pos.reserve(subset.size());
    for (const auto& s : subset) {
        for (std::size_t i = 0; i < full.size(); ++i) {
            if (full[i].tensor == s.tensor) {
                pos.push_back(i);
                break;
            }
        }
    }
    return pos;
}

}  // namespace detail

/// Greedy-decoding letter error rate over a set of instances.
inline double greedy_letter_error_rate(const ModelParams& params, const data::Dataset& dataset,
                                       const std::vector<std::size_t>& indices, std::size_t max_len) {
    if (indices.empty()) throw std::invalid_argument("greedy_letter_error_rate: no instances");
    Vocab vocab = params.config.vocab();
    std::vector<std::pair<std::vector<int>, std::vector<int>>> pairs;
    pairs.reserve(indices.size());
    for (std::size_t idx : indices) {
        std::vector<int> hyp = dec::greedy_decode(params, dataset.frames(idx), max_len);
        pairs.emplace_back(std::move(hyp), vocab.to_ids(dataset.instances()[idx].word));
    }
    return eval::letter_error_rate(pairs);
}

/// First curriculum phase: optimizes only the auto-encoder loss over an
/// unlabeled frame pool.  Only the feature extractor's parameters are
/// updated; the sequence model is untouched.  batch_size counts frames.
inline TrainResult pretrain_unlabeled(const std::vector<Tensor>& pool, ModelParams params,
                                      const TrainConfig& cfg) {
    cfg.validate();
    if (pool.empty()) throw std::invalid_argument("pretrain: empty pool");
    if (params.config.mode == nn::AeMode::None) {
        throw std::invalid_argument("pretrain: mode has no auto-encoder loss");
    }
    std::size_t dx = params.config.image_dim;
    for (const Tensor& f : pool) {
        if (f.size() != dx) throw std::invalid_argument("pretrain: frame size does not match image_dim");
    }

    TrainReport report;
    auto feature_subset = params.feature_named();
    auto positions = detail::subset_positions(params, feature_subset);
    num::AdamState adam({cfg.learning_rate});

    std::vector<std::size_t> order(pool.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        double t0 = detail::now_ms();
        Rng shuffle_rng = Rng(cfg.seed).split("pretrain-shuffle").split(epoch);
        shuffle_rng.shuffle(order);
        double loss_sum = 0.0;
        std::size_t frames_seen = 0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_index) {
            std::size_t n = std::min(cfg.batch_size, order.size() - start);
            std::vector<std::size_t> batch(order.begin() + static_cast<long>(start),
                                           order.begin() + static_cast<long>(start + n));
            std::sort(batch.begin(), batch.end());
            Tensor x({n, dx});
            for (std::size_t r = 0; r < n; ++r) {
                const Tensor& f = pool[batch[r]];
                for (std::size_t j = 0; j < dx; ++j) x.at(r, j) = f[j];
            }
            num::Tape tape;
            nn::TapeModel tm = nn::TapeModel::leaf_all(tape, params);
            Rng rng = Rng(cfg.seed).split("pretrain").split(epoch).split(batch_index);
            nn::FeaturePipeline p = nn::build_features(tape, tm, params.config, x, rng,
                                                       /*training=*/true, /*with_ae_loss=*/true);
            ++report.ae_loss_evaluations;
            num::Var loss = tape.scale(p.ae_total, 1.0 / static_cast<double>(n));
            double loss_value = tape.value(loss)[0];
            detail::check_finite_loss(loss_value);
            loss_sum += loss_value * static_cast<double>(n);
            frames_seen += n;
            tape.backward(loss);
            std::vector<Tensor> all_grads = tm.gradients(tape);
            std::vector<Tensor> grads;
            std::vector<Tensor*> tensors;
            grads.reserve(positions.size());
            tensors.reserve(positions.size());
            for (std::size_t k = 0; k < positions.size(); ++k) {
                grads.push_back(std::move(all_grads[positions[k]]));
                tensors.push_back(feature_subset[k].tensor);
            }
            num::clip_global_norm(grads, cfg.grad_clip);
            adam.step(tensors, grads);
        }
        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = loss_sum / static_cast<double>(frames_seen);
        rec.learning_rate = adam.config().alpha;
        rec.millis = detail::now_ms() - t0;
        report.epochs.push_back(rec);
    }
    return {std::move(params), std::move(report)};
}

/// Labeled training on the multitask objective with plateau decay: after
/// each epoch the validation letter accuracy (greedy decoding) is measured,
/// and when it has not improved for `patience` epochs the learning rate is
/// multiplied by decay_factor.  Stops at max_epochs or when the rate falls
/// below lr_floor.
inline TrainResult train_labeled(const data::Dataset& dataset, const data::ExperimentSplit& split,
                                 ModelParams params, const TrainConfig& cfg) {
    cfg.validate();
    if (split.train.empty()) throw std::invalid_argument("train: empty training set");
    Vocab vocab = params.config.vocab();

    TrainReport report;
    std::set<int> signers;
    for (std::size_t idx : split.train) signers.insert(dataset.instances()[idx].signer);
    for (std::size_t idx : split.validation) signers.insert(dataset.instances()[idx].signer);
    report.signers_accessed.assign(signers.begin(), signers.end());

    num::AdamState adam({cfg.learning_rate});
    double best_acc = -1.0;
    std::size_t since_improved = 0;

    std::vector<std::size_t> order = split.train;
    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        double t0 = detail::now_ms();
        Rng shuffle_rng = Rng(cfg.seed).split("shuffle").split(epoch);
        shuffle_rng.shuffle(order);
        double loss_sum = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            std::size_t n = std::min(cfg.batch_size, order.size() - start);
            std::vector<std::size_t> batch(order.begin() + static_cast<long>(start),
                                           order.begin() + static_cast<long>(start + n));
            // fixed summation order regardless of shuffle position
            std::sort(batch.begin(), batch.end());
            num::Tape tape;
            nn::TapeModel tm = nn::TapeModel::leaf_all(tape, params);
            num::Var total;
            for (std::size_t k = 0; k < n; ++k) {
                std::size_t idx = batch[k];
                const data::InstanceMeta& meta = dataset.instances()[idx];
                Rng rng = Rng(cfg.seed).split("loss").split(epoch).split(idx);
                nn::MultitaskLoss loss =
                    nn::build_multitask_loss(tape, tm, params.config, dataset.frames(idx),
                                             vocab.to_ids(meta.word), rng, /*training=*/true);
                if (loss.ae_built) ++report.ae_loss_evaluations;
                total = k == 0 ? loss.total : tape.add(total, loss.total);
            }
            num::Var mean = tape.scale(total, 1.0 / static_cast<double>(n));
            double loss_value = tape.value(mean)[0];
            detail::check_finite_loss(loss_value);
            loss_sum += loss_value * static_cast<double>(n);
            seen += n;
            tape.backward(mean);
            std::vector<Tensor> grads = tm.gradients(tape);
            num::clip_global_norm(grads, cfg.grad_clip);
            std::vector<Tensor*> tensors;
            tensors.reserve(grads.size());
            for (auto& nt : params.named()) tensors.push_back(nt.tensor);
            adam.step(tensors, grads);
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = loss_sum / static_cast<double>(seen);
        rec.learning_rate = adam.config().alpha;
        if (!split.validation.empty()) {
            double ler = greedy_letter_error_rate(params, dataset, split.validation, cfg.max_decode_len);
            rec.val_letter_accuracy = 100.0 - ler;
        }
        rec.millis = detail::now_ms() - t0;
        report.epochs.push_back(rec);

        if (!split.validation.empty()) {
            if (rec.val_letter_accuracy > best_acc) {
                best_acc = rec.val_letter_accuracy;
                since_improved = 0;
            } else {
                ++since_improved;
                if (since_improved >= cfg.patience) {
                    adam.set_learning_rate(adam.config().alpha * cfg.decay_factor);
                    since_improved = 0;
                }
            }
        }
        if (adam.config().alpha < cfg.lr_floor) break;
    }
    if (!report.epochs.empty()) {
        report.final_val_letter_accuracy = report.epochs.back().val_letter_accuracy;
    }
    return {std::move(params), std::move(report)};
}

/// Signer adaptation: warm-start from a signer-independent model and
/// continue labeled training on the adaptation slice, tuning on the
/// held-out tuning slice.  Only word-level labels are used.
inline TrainResult adapt(ModelParams si_params, const data::Dataset& dataset,
                         const data::ExperimentSplit& split, const TrainConfig& cfg) {
    if (split.protocol != data::Protocol::SA) {
        throw std::invalid_argument("adapt: split is not a signer-adaptation split");
    }
    if (cfg.max_epochs == 0) {
        TrainResult r{std::move(si_params), {}};
        return r;
    }
    data::ExperimentSplit inner;
    inner.protocol = data::Protocol::SA;
    inner.train = split.adaptation;
    inner.validation = split.validation;
    inner.test = split.test;
    return train_labeled(dataset, inner, std::move(si_params), cfg);
}

}  // namespace fsrec::train
