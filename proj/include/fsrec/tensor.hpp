#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsrec::num {

/// Dense row-major tensor of 64-bit floats.  Rank is dynamic but all the
/// model code only ever builds rank-1 and rank-2 tensors; scalars are
/// rank-1 tensors of size one.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape)
        : shape_(std::move(shape)), data_(checked_size(shape_), 0.0) {}

    Tensor(std::vector<std::size_t> shape, std::vector<double> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (data_.size() != checked_size(shape_)) {
            throw std::invalid_argument("Tensor: data length does not match shape");
        }
    }

    static Tensor scalar(double v) { return Tensor({1}, {v}); }

    static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }

    static Tensor full(std::vector<std::size_t> shape, double v) {
        Tensor t(std::move(shape));
        std::fill(t.data_.begin(), t.data_.end(), v);
        return t;
    }

    static Tensor vector(std::vector<double> values) {
        std::size_t n = values.size();
        return Tensor({n}, std::move(values));
    }

    static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
        return Tensor({rows, cols}, std::move(values));
    }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t ndim() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    /// Rank-2 accessors; rank-1 tensors count as a single row.
    std::size_t rows() const { return ndim() == 2 ? shape_[0] : 1; }
    std::size_t cols() const { return ndim() == 2 ? shape_[1] : size(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    bool all_finite() const {
        for (double v : data_) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    std::string shape_str() const {
        std::string s = "(";
        for (std::size_t i = 0; i < shape_.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(shape_[i]);
        }
        return s + ")";
    }

    // Eigen views over the flat storage (rank-1 maps to a single row).
    using EigenMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<EigenMatrix> mat() {
        return {data_.data(), static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols())};
    }
    Eigen::Map<const EigenMatrix> mat() const {
        return {data_.data(), static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols())};
    }

private:
    static std::size_t checked_size(const std::vector<std::size_t>& shape) {
        if (shape.empty()) {
            throw std::invalid_argument("Tensor: shape must have at least one dimension");
        }
        std::size_t n = 1;
        for (std::size_t d : shape) {
            if (d == 0) throw std::invalid_argument("Tensor: zero-sized dimension");
            n *= d;
        }
        return n;
    }

    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

inline bool bitwise_equal(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) return false;
    }
    return true;
}

}  // namespace fsrec::num
