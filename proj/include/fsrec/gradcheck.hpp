#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "fsrec/errors.hpp"
#include "fsrec/tensor.hpp"

namespace fsrec::num {

/// One named parameter entry for gradient checking.
struct NamedTensor {
    std::string name;
    Tensor* tensor;
};

/// Central finite-difference check of an analytic gradient.
///
/// loss_fn must be a deterministic function of the parameters (any internal
/// randomness fixed by seeds); determinism is verified by evaluating twice.
/// analytic_grads holds one gradient tensor per entry of params, shape
/// matched.  Returns the maximum over all parameter entries of
///   |analytic - central difference| / max(|analytic|, |cd|, 1e-8).
inline double finite_difference_check(const std::function<double()>& loss_fn,
                                      const std::vector<NamedTensor>& params,
                                      const std::vector<Tensor>& analytic_grads,
                                      double eps = 1e-5,
                                      std::string* worst_entry = nullptr) {
    if (params.size() != analytic_grads.size()) {
        throw std::invalid_argument("finite_difference_check: parameter/gradient count mismatch");
    }
    double l0 = loss_fn();
    double l1 = loss_fn();
    if (l0 != l1) {
        throw NumericError("finite_difference_check: loss function is not deterministic");
    }

    double worst = 0.0;
    for (std::size_t k = 0; k < params.size(); ++k) {
        Tensor& p = *params[k].tensor;
        const Tensor& ag = analytic_grads[k];
        if (!p.same_shape(ag)) {
            throw std::invalid_argument("finite_difference_check: gradient shape mismatch for " +
                                        params[k].name);
        }
        for (std::size_t i = 0; i < p.size(); ++i) {
            double orig = p[i];
            p[i] = orig + eps;
            double lp = loss_fn();
            p[i] = orig - eps;
            double lm = loss_fn();
            p[i] = orig;
            double fd = (lp - lm) / (2.0 * eps);
            double a = ag[i];
            double denom = std::max({std::abs(a), std::abs(fd), 1e-8});
            double rel = std::abs(a - fd) / denom;
            if (rel > worst) {
                worst = rel;
                if (worst_entry) {
                    *worst_entry = params[k].name + "[" + std::to_string(i) + "] analytic=" +
                                   std::to_string(a) + " fd=" + std::to_string(fd);
                }
            }
        }
    }
    return worst;
}

}  // namespace fsrec::num
