#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace aqua {

// Dense row-major array of doubles. Models in this project only ever need
// rank 1 or 2, so the 2-D accessors assume that.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape)
        : shape_(std::move(shape)), data_(count(shape_), 0.0) {}

    Tensor(std::vector<std::size_t> shape, std::vector<double> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (count(shape_) != data_.size()) {
            throw std::invalid_argument("Tensor: shape/data size mismatch");
        }
    }

    static Tensor zeros(std::size_t rows, std::size_t cols) {
        return Tensor({rows, cols});
    }

    static Tensor full(std::size_t rows, std::size_t cols, double v) {
        Tensor t({rows, cols});
        for (auto& x : t.data_) x = v;
        return t;
    }

    static Tensor scalar(double v) { return Tensor({1, 1}, {v}); }

    // 1 x n row vector.
    static Tensor row(std::vector<double> v) {
        std::size_t n = v.size();
        return Tensor({1, n}, std::move(v));
    }

    // n x 1 column vector.
    static Tensor col(std::vector<double> v) {
        std::size_t n = v.size();
        return Tensor({n, 1}, std::move(v));
    }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
    std::size_t cols() const {
        if (shape_.size() < 2) return shape_.size() == 1 ? 1 : 0;
        return shape_[1];
    }

    double& operator()(std::size_t r, std::size_t c) {
        return data_[r * cols() + c];
    }
    double operator()(std::size_t r, std::size_t c) const {
        return data_[r * cols() + c];
    }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    bool all_finite() const {
        for (double v : data_) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    double item() const {
        if (data_.size() != 1) throw std::invalid_argument("Tensor::item: not a scalar");
        return data_[0];
    }

    Tensor& operator+=(const Tensor& o) {
        assert(same_shape(o));
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }

private:
    static std::size_t count(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (std::size_t d : s) {
            if (d == 0) throw std::invalid_argument("Tensor: zero dimension");
            n *= d;
        }
        return s.empty() ? 0 : n;
    }

    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

} // namespace aqua
