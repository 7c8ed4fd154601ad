#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fsrec/tensor.hpp"

namespace fsrec::num {

/// Adam optimizer state for one parameter tensor: first/second moment
/// estimates plus a shared step counter held by the caller.
struct AdamSlot {
    Tensor m;
    Tensor v;
};

struct AdamConfig {
    double alpha = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Bias-corrected Adam over a fixed list of parameter tensors.  Moment
/// tensors always match their parameters' shapes; the step counter strictly
/// increases with each step() call.
class AdamState {
public:
    explicit AdamState(AdamConfig config = {}) : config_(config) {}

    const AdamConfig& config() const { return config_; }
    void set_learning_rate(double alpha) { config_.alpha = alpha; }
    std::uint64_t step_count() const { return step_; }

    /// One update over parallel parameter/gradient lists.  The slot list
    /// grows on first use and is keyed by position, so the caller must pass
    /// parameters in a fixed order.
    void step(std::vector<Tensor*> params, const std::vector<Tensor>& grads) {
        if (params.size() != grads.size()) {
            throw std::invalid_argument("adam: parameter/gradient count mismatch");
        }
        if (slots_.empty()) {
            slots_.reserve(params.size());
            for (const Tensor* p : params) {
                slots_.push_back({Tensor::zeros(p->shape()), Tensor::zeros(p->shape())});
            }
        }
        if (slots_.size() != params.size()) {
            throw std::invalid_argument("adam: parameter count changed between steps");
        }
        ++step_;
        double b1t = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
        double b2t = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
        for (std::size_t k = 0; k < params.size(); ++k) {
            Tensor& p = *params[k];
            const Tensor& g = grads[k];
            AdamSlot& s = slots_[k];
            if (!p.same_shape(g) || !p.same_shape(s.m)) {
                throw std::invalid_argument("adam: shape mismatch for parameter " + std::to_string(k) +
                                            " " + p.shape_str() + " vs " + g.shape_str());
            }
            for (std::size_t i = 0; i < p.size(); ++i) {
                s.m[i] = config_.beta1 * s.m[i] + (1.0 - config_.beta1) * g[i];
                s.v[i] = config_.beta2 * s.v[i] + (1.0 - config_.beta2) * g[i] * g[i];
                double mhat = s.m[i] / b1t;
                double vhat = s.v[i] / b2t;
                p[i] -= config_.alpha * mhat / (std::sqrt(vhat) + config_.epsilon);
            }
        }
    }

    const AdamSlot& slot(std::size_t k) const { return slots_.at(k); }

private:
    AdamConfig config_;
    std::uint64_t step_ = 0;
    std::vector<AdamSlot> slots_;
};

/// Clips gradients in place to a global L2 norm; a limit of 0 disables
/// clipping.  Returns the pre-clip norm.
inline double clip_global_norm(std::vector<Tensor>& grads, double limit) {
    double sq = 0.0;
    for (const Tensor& g : grads) {
        for (double v : g.values()) sq += v * v;
    }
    double norm = std::sqrt(sq);
    if (limit > 0.0 && norm > limit) {
        double f = limit / norm;
        for (Tensor& g : grads) {
            for (double& v : g.values()) v *= f;
        }
    }
    return norm;
}

}  // namespace fsrec::num
