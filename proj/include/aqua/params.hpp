#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include "aqua/rng.hpp"
#include "aqua/tape.hpp"
#include "aqua/tensor.hpp"

namespace aqua {

// Named parameter tensors for one model instance. Shapes are fixed once a
// name is added.
class ParamSet {
public:
    ParamSet() = default;
    explicit ParamSet(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    void add(const std::string& name, Tensor t) {
        if (values_.count(name)) throw std::invalid_argument("ParamSet: duplicate " + name);
        values_.emplace(name, std::move(t));
    }

    Tensor& at(const std::string& name) {
        auto it = values_.find(name);
        if (it == values_.end()) throw std::out_of_range("ParamSet: missing " + name);
        return it->second;
    }
    const Tensor& at(const std::string& name) const {
        auto it = values_.find(name);
        if (it == values_.end()) throw std::out_of_range("ParamSet: missing " + name);
        return it->second;
    }

    bool has(const std::string& name) const { return values_.count(name) != 0; }

    std::map<std::string, Tensor>& values() { return values_; }
    const std::map<std::string, Tensor>& values() const { return values_; }

    std::size_t count_entries() const {
        std::size_t n = 0;
        for (const auto& [k, v] : values_) n += v.size();
        return n;
    }

    // Record every parameter as a tape leaf; returns name -> Var.
    VarMap inject(Tape& tape) const {
        VarMap out;
        for (const auto& [name, t] : values_) out[name] = tape.leaf(t);
        return out;
    }

private:
    std::uint64_t seed_ = 0;
    std::map<std::string, Tensor> values_;
};

// ---- initializers ---------------------------------------------------------

inline Tensor glorot_uniform(Rng& rng, std::size_t fan_in, std::size_t fan_out) {
    double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Tensor t = Tensor::zeros(fan_in, fan_out);
    for (auto& v : t.data()) v = rng.uniform(-limit, limit);
    return t;
}

inline Tensor fan_in_uniform(Rng& rng, std::size_t rows, std::size_t cols, std::size_t fan_in) {
    double limit = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Tensor t = Tensor::zeros(rows, cols);
    for (auto& v : t.data()) v = rng.uniform(-limit, limit);
    return t;
}

} // namespace aqua
